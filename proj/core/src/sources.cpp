#include "ultraholo/sources.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace uh {

std::int64_t SequenceSource::index_for(double log_t) const {
  std::int64_t lo = 0, hi = horizon();
  if (log_mu(1) > log_t) return 0;
  if (log_mu(hi) <= log_t) return hi;
  lo = 1;
  // invariant: log_mu(lo) <= log_t < log_mu(hi)
  while (hi - lo > 1) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (log_mu(mid) <= log_t) lo = mid;
    else hi = mid;
  }
  return lo;
}

WeightSequence SequenceSource::materialize(std::size_t P) const {
  if (std::int64_t(P) > horizon()) throw Error("horizon-exhausted", "materialize beyond horizon");
  std::vector<double> v(P + 1);
  for (std::size_t p = 0; p <= P; ++p) v[p] = log_term(std::int64_t(p));
  return WeightSequence(std::move(v), label());
}

namespace {

class TableSource final : public SequenceSource {
 public:
  explicit TableSource(const WeightSequence& M) : M_(log_convex_minorant(M)), orig_label_(M.label()) {
    mu_ = quotients(M_).log_mu;
  }
  double log_term(std::int64_t p) const override { return M_.log_term(std::size_t(p)); }
  double log_mu(std::int64_t p) const override { return mu_.at(std::size_t(p)); }
  std::int64_t horizon() const override { return std::int64_t(M_.horizon()); }
  std::int64_t index_for(double log_t) const override {
    auto it = std::upper_bound(mu_.begin() + 1, mu_.end(), log_t);
    return std::int64_t(it - mu_.begin()) - 1;
  }
  nlohmann::json to_json() const override {
    return {{"kind", "table"}, {"label", orig_label_}, {"log_terms", M_.log_terms()}};
  }
  std::string label() const override { return orig_label_; }

 private:
  WeightSequence M_;
  std::string orig_label_;
  std::vector<double> mu_;
};

class GevreySource final : public SequenceSource {
 public:
  explicit GevreySource(double s) : s_(s) {
    if (s < 0) throw Error("invalid-argument", "gevrey exponent must be >= 0");
  }
  double log_term(std::int64_t p) const override { return s_ * log_factorial(double(p)); }
  double log_mu(std::int64_t p) const override { return p == 0 ? 0.0 : s_ * std::log(double(p)); }
  std::int64_t horizon() const override { return kClosedFormHorizon; }
  std::int64_t index_for(double log_t) const override {
    if (s_ == 0) return log_t >= 0 ? horizon() : 0;
    double guess = std::floor(std::exp(log_t / s_));
    if (!(guess < double(horizon()))) return horizon();
    std::int64_t p = std::max<std::int64_t>(0, std::int64_t(guess));
    while (p + 1 <= horizon() && log_mu(p + 1) <= log_t) ++p;
    while (p > 0 && log_mu(p) > log_t) --p;
    return p;
  }
  nlohmann::json to_json() const override { return {{"kind", "gevrey"}, {"s", s_}}; }
  std::string label() const override {
    std::ostringstream os;
    os << "gevrey(" << s_ << ")";
    return os.str();
  }

 private:
  double s_;
};

class PathologicalSource final : public SequenceSource {
 public:
  PathologicalSource(double q, std::vector<std::int64_t> anchors) : q_(q), lq_(std::log(q)) {
    if (q < std::exp(1.0) - 1e-12) throw Error("invalid-argument", "q must be >= e");
    if (anchors.empty()) anchors = default_pathological_seed();
    seed_ = anchors;
    a_ = pathological_anchors(std::move(anchors), std::int64_t(1) << 40);
    horizon_ = a_.back();
    slopes_.resize(a_.size());
    for (std::size_t j = 0; j < a_.size(); ++j) {
      double f1 = pathological_f(a_, double(a_[j]));
      double f0 = j == 0 ? 0.0 : pathological_f(a_, double(a_[j - 1]));
      double x0 = j == 0 ? 0.0 : double(a_[j - 1]);
      slopes_[j] = (f1 - f0) / (double(a_[j]) - x0) * lq_;
    }
  }
  double log_term(std::int64_t p) const override { return pathological_f(a_, double(p)) * lq_; }
  double log_mu(std::int64_t p) const override {
    if (p == 0) return 0.0;
    auto it = std::lower_bound(a_.begin(), a_.end(), p);  // a[j-1] < p <= a[j]
    return slopes_[std::size_t(it - a_.begin())];
  }
  std::int64_t horizon() const override { return horizon_; }
  std::int64_t index_for(double log_t) const override {
    // mu is constant on (a_{j-1}, a_j]; the answer is a segment end.
    auto it = std::upper_bound(slopes_.begin(), slopes_.end(), log_t);
    std::size_t j = std::size_t(it - slopes_.begin());
    if (j == 0) return 0;
    return a_[j - 1];
  }
  nlohmann::json to_json() const override {
    return {{"kind", "pathological"}, {"q", q_}, {"anchors", seed_}};
  }
  std::string label() const override { return "pathological"; }

 private:
  double q_, lq_;
  std::vector<std::int64_t> seed_, a_;
  std::vector<double> slopes_;
  std::int64_t horizon_;
};

class ShiftSource final : public SequenceSource {
 public:
  ShiftSource(SourcePtr base, double c) : base_(std::move(base)), c_(c) {
    if (c < 0) throw Error("invalid-argument", "factorial shift must be >= 0");
  }
  double log_term(std::int64_t p) const override { return base_->log_term(p) + c_ * log_factorial(double(p)); }
  double log_mu(std::int64_t p) const override {
    return p == 0 ? 0.0 : base_->log_mu(p) + c_ * std::log(double(p));
  }
  std::int64_t horizon() const override { return base_->horizon(); }
  nlohmann::json to_json() const override {
    return {{"kind", "factorial_shift"}, {"c", c_}, {"base", base_->to_json()}};
  }
  std::string label() const override {
    std::ostringstream os;
    os << base_->label() << "*p!^" << c_;
    return os.str();
  }

 private:
  SourcePtr base_;
  double c_;
};

}  // namespace

SourcePtr table_source(const WeightSequence& M) { return std::make_shared<TableSource>(M); }
SourcePtr gevrey_source(double s) { return std::make_shared<GevreySource>(s); }
SourcePtr pathological_source(double q, std::vector<std::int64_t> anchors) {
  return std::make_shared<PathologicalSource>(q, std::move(anchors));
}
SourcePtr factorial_shift_source(SourcePtr base, double c) {
  return std::make_shared<ShiftSource>(std::move(base), c);
}

SourcePtr source_from_json(const nlohmann::json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "table") {
    return table_source(WeightSequence(j.at("log_terms").get<std::vector<double>>(),
                                       j.value("label", std::string("table"))));
  }
  if (kind == "gevrey") return gevrey_source(j.at("s").get<double>());
  if (kind == "pathological")
    return pathological_source(j.value("q", std::exp(1.0)),
                               j.value("anchors", std::vector<std::int64_t>{}));
  if (kind == "factorial_shift")
    return factorial_shift_source(source_from_json(j.at("base")), j.at("c").get<double>());
  throw Error("bad-spec", "unknown sequence kind " + kind);
}

}  // namespace uh
