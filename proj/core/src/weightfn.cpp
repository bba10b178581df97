#include "ultraholo/weightfn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ultraholo/conjugate.hpp"

namespace uh {

namespace {

using nlohmann::json;

class PowerNode final : public Node {
 public:
  explicit PowerNode(double a) : a_(a) {
    if (!(a > 0)) throw Error("bad-spec", "power exponent must be > 0");
  }
  double eval(double t) const override { return t <= 0 ? 0.0 : std::pow(t, a_); }
  json to_json() const override { return {{"kind", "power"}, {"args", {a_}}}; }
  std::optional<double> phi_star(double x) const override {
    if (x <= 0) return 0.0;
    double r = x / a_;
    return r * std::log(r) - r;
  }
  std::optional<double> upper_star(double s) const override {
    if (a_ > 1) throw Error("unbounded-objective", "power > 1 has no upper conjugate");
    if (a_ == 1) {
      if (s >= 1) return 0.0;
      throw Error("unbounded-objective", "t - s t is unbounded for s < 1");
    }
    double tstar = std::pow(a_ / s, 1.0 / (1.0 - a_));
    return (1.0 - a_) * std::pow(tstar, a_);
  }

 private:
  double a_;
};

class LogPowerNode final : public Node {
 public:
  explicit LogPowerNode(double s) : s_(s) {
    if (!(s > 0)) throw Error("bad-spec", "log-power exponent must be > 0");
  }
  double eval(double t) const override { return t <= 1 ? 0.0 : std::pow(std::log(t), s_); }
  json to_json() const override { return {{"kind", "logpower"}, {"args", {s_}}}; }
  void breakpoints(double lo, double hi, std::vector<double>& out, std::size_t) const override {
    if (lo <= 1 && 1 <= hi) out.push_back(1.0);
  }

 private:
  double s_;
};

class SequenceNode final : public Node {
 public:
  explicit SequenceNode(SourcePtr src) : src_(std::move(src)) {}
  double eval(double t) const override { return omega_M(*src_, t); }
  json to_json() const override { return {{"kind", "sequence"}, {"args", {src_->to_json()}}}; }
  std::optional<double> phi_star(double x) const override {
    // Convex conjugate of a piecewise-linear phi: interpolated log M.
    if (x <= 0) return 0.0;
    double f = std::floor(x);
    if (f + 1 > double(src_->horizon())) throw Error("horizon-exhausted", "phi_star beyond horizon");
    std::int64_t p = std::int64_t(f);
    double a = src_->log_term(p);
    if (x == f) return a;
    return a + (x - f) * src_->log_mu(p + 1);
  }
  void breakpoints(double lo, double hi, std::vector<double>& out, std::size_t cap) const override {
    if (!(hi > 0)) return;
    std::int64_t p = lo > 0 ? src_->index_for(std::log(lo)) + 1 : 1;
    for (std::size_t n = 0; n < cap && p <= src_->horizon(); ++n, ++p) {
      double mu = std::exp(src_->log_mu(p));
      if (mu > hi) break;
      if (mu >= lo) out.push_back(mu);
    }
  }
  const SourcePtr& source() const { return src_; }

 private:
  SourcePtr src_;
};

class RamifiedNode final : public Node {
 public:
  RamifiedNode(Expr w, double s) : w_(std::move(w)), s_(s) {
    if (s == 0) throw Error("bad-spec", "ramification exponent must be nonzero");
  }
  double eval(double t) const override {
    if (t <= 0) return s_ > 0 ? w_->eval(0.0) : w_->eval(kInf);
    return w_->eval(std::pow(t, s_));
  }
  json to_json() const override { return {{"kind", "ramified"}, {"args", {w_->to_json(), s_}}}; }
  std::optional<double> phi_star(double x) const override {
    if (s_ < 0) return std::nullopt;
    return w_->phi_star(x / s_);
  }
  void breakpoints(double lo, double hi, std::vector<double>& out, std::size_t cap) const override {
    double a = std::pow(lo, s_), b = std::pow(hi, s_);
    if (a > b) std::swap(a, b);
    std::vector<double> inner;
    w_->breakpoints(a, b, inner, cap);
    for (double v : inner) out.push_back(std::pow(v, 1.0 / s_));
  }

 private:
  Expr w_;
  double s_;
};

class ScaledNode final : public Node {
 public:
  ScaledNode(double c, Expr w) : c_(c), w_(std::move(w)) {
    if (!(c > 0)) throw Error("bad-spec", "scale must be > 0");
  }
  double eval(double t) const override { return c_ * w_->eval(t); }
  json to_json() const override { return {{"kind", "scaled"}, {"args", {c_, w_->to_json()}}}; }
  std::optional<double> phi_star(double x) const override {
    if (auto v = w_->phi_star(x / c_)) return c_ * *v;
    return std::nullopt;
  }
  std::optional<double> upper_star(double s) const override {
    if (auto v = w_->upper_star(s / c_)) return c_ * *v;
    return std::nullopt;
  }
  void breakpoints(double lo, double hi, std::vector<double>& out, std::size_t cap) const override {
    w_->breakpoints(lo, hi, out, cap);
  }

 private:
  double c_;
  Expr w_;
};

class FoldNode final : public Node {
 public:
  FoldNode(std::vector<Expr> ws, bool is_max) : ws_(std::move(ws)), max_(is_max) {
    if (ws_.empty()) throw Error("bad-spec", "sum/max needs at least one argument");
  }
  double eval(double t) const override {
    double acc = max_ ? -kInf : 0.0;
    for (auto& w : ws_) acc = max_ ? std::max(acc, w->eval(t)) : acc + w->eval(t);
    return acc;
  }
  json to_json() const override {
    json args = json::array();
    for (auto& w : ws_) args.push_back(w->to_json());
    return {{"kind", max_ ? "max" : "sum"}, {"args", args}};
  }
  void breakpoints(double lo, double hi, std::vector<double>& out, std::size_t cap) const override {
    for (auto& w : ws_) w->breakpoints(lo, hi, out, cap);
  }

 private:
  std::vector<Expr> ws_;
  bool max_;
};

class ConstantNode final : public Node {
 public:
  explicit ConstantNode(double c) : c_(c) {}
  double eval(double) const override { return c_; }
  json to_json() const override { return {{"kind", "constant"}, {"args", {c_}}}; }

 private:
  double c_;
};

class UpperStarNode final : public Node {
 public:
  explicit UpperStarNode(Expr w) : w_(std::move(w)) {}
  double eval(double s) const override { return uh::upper_star(WeightFunction(w_), s); }
  json to_json() const override { return {{"kind", "upper_star"}, {"args", {w_->to_json()}}}; }

 private:
  Expr w_;
};

class LowerStarNode final : public Node {
 public:
  explicit LowerStarNode(Expr h) : h_(std::move(h)) {}
  double eval(double t) const override { return uh::lower_star(WeightFunction(h_), t); }
  json to_json() const override { return {{"kind", "lower_star"}, {"args", {h_->to_json()}}}; }

 private:
  Expr h_;
};

class KappaNode final : public Node {
 public:
  explicit KappaNode(Expr w) : w_(std::move(w)) {}
  double eval(double t) const override { return uh::kappa(WeightFunction(w_), t); }
  json to_json() const override { return {{"kind", "kappa"}, {"args", {w_->to_json()}}}; }

 private:
  Expr w_;
};

}  // namespace

double WeightFunction::eval(double t) const {
  if (!e_) throw Error("empty-weight", "weight function has no expression");
  if (t < 0) throw Error("negative-argument", "weight functions are defined on t >= 0");
  return e_->eval(t);
}

json WeightFunction::to_json() const {
  json j = e_->to_json();
  j["version"] = 1;
  return j;
}

std::vector<double> WeightFunction::breakpoints(double lo, double hi, std::size_t cap) const {
  std::vector<double> out;
  e_->breakpoints(lo, hi, out, cap);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

WeightFunction power(double a) { return WeightFunction(std::make_shared<PowerNode>(a)); }
WeightFunction log_power(double s) { return WeightFunction(std::make_shared<LogPowerNode>(s)); }
WeightFunction from_sequence(SourcePtr src) { return WeightFunction(std::make_shared<SequenceNode>(std::move(src))); }
WeightFunction from_sequence(const WeightSequence& M) { return from_sequence(table_source(M)); }
WeightFunction ramified(const WeightFunction& w, double s) {
  return WeightFunction(std::make_shared<RamifiedNode>(w.expr(), s));
}
WeightFunction scaled(double c, const WeightFunction& w) {
  return WeightFunction(std::make_shared<ScaledNode>(c, w.expr()));
}
WeightFunction sum(std::vector<WeightFunction> ws) {
  std::vector<Expr> es;
  for (auto& w : ws) es.push_back(w.expr());
  return WeightFunction(std::make_shared<FoldNode>(std::move(es), false));
}
WeightFunction max_of(std::vector<WeightFunction> ws) {
  std::vector<Expr> es;
  for (auto& w : ws) es.push_back(w.expr());
  return WeightFunction(std::make_shared<FoldNode>(std::move(es), true));
}
WeightFunction constant(double c) { return WeightFunction(std::make_shared<ConstantNode>(c)); }
WeightFunction upper_star_of(const WeightFunction& w) {
  return WeightFunction(std::make_shared<UpperStarNode>(w.expr()));
}
WeightFunction lower_star_of(const WeightFunction& h) {
  return WeightFunction(std::make_shared<LowerStarNode>(h.expr()));
}
WeightFunction kappa_of(const WeightFunction& w) { return WeightFunction(std::make_shared<KappaNode>(w.expr())); }

WeightFunction WeightFunction::from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const json& a = j.contains("args") ? j.at("args") : json::array();
  auto sub = [&](std::size_t i) { return from_json(a.at(i)); };
  if (kind == "power") return power(a.at(0).get<double>());
  if (kind == "logpower") return log_power(a.at(0).get<double>());
  if (kind == "sequence") return from_sequence(source_from_json(a.at(0)));
  if (kind == "ramified") return ramified(sub(0), a.at(1).get<double>());
  if (kind == "inversion") return inversion(sub(0));
  if (kind == "scaled") return scaled(a.at(0).get<double>(), sub(1));
  if (kind == "sum" || kind == "max") {
    std::vector<WeightFunction> ws;
    for (std::size_t i = 0; i < a.size(); ++i) ws.push_back(sub(i));
    return kind == "sum" ? sum(std::move(ws)) : max_of(std::move(ws));
  }
  if (kind == "constant") return constant(a.at(0).get<double>());
  if (kind == "upper_star") return upper_star_of(sub(0));
  if (kind == "lower_star") return lower_star_of(sub(0));
  if (kind == "kappa") return kappa_of(sub(0));
  throw Error("bad-spec", "unknown weight kind " + kind);
}

WeightFunction WeightFunction::parse(const std::string& spec) {
  if (spec.empty()) throw Error("bad-spec", "empty weight spec");
  if (spec.front() == '{') return from_json(json::parse(spec));
  auto colon = spec.find(':');
  std::string head = spec.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "power") return power(std::stod(arg));
  if (head == "logpower") return log_power(std::stod(arg));
  if (head == "gevrey") return from_sequence(gevrey_source(arg.empty() ? 1.0 : std::stod(arg)));
  if (head == "pathological") return from_sequence(pathological_source());
  std::ifstream in(spec);
  if (in) {
    json j = json::parse(in);
    if (j.contains("weight")) j = j.at("weight");
    return from_json(j);
  }
  throw Error("bad-spec", "cannot parse weight spec '" + spec + "'");
}

// ---- associated functions ----

double omega_M(const SequenceSource& M, double t) {
  if (t < 0) throw Error("negative-argument", "omega_M needs t >= 0");
  if (t == 0) return 0.0;
  const double lt = std::log(t);
  std::int64_t p = M.index_for(lt);
  if (p >= M.horizon()) throw Error("horizon-exhausted", "omega_M argmax reaches the horizon");
  if (p == 0) return 0.0;
  return double(p) * lt - M.log_term(p);
}

double omega_M(const WeightSequence& M, double t) { return omega_M(*table_source(M), t); }

double omega_M_bruteforce(const WeightSequence& M, double t, std::size_t* argmax) {
  const double lt = std::log(t);
  double best = 0.0;
  std::size_t arg = 0;
  for (std::size_t p = 1; p <= M.horizon(); ++p) {
    double v = double(p) * lt - M.log_term(p);
    if (v >= best - 1e-13 * std::max(1.0, std::fabs(best))) {
      if (v > best) best = v;
      arg = p;
    }
  }
  if (argmax) *argmax = arg;
  return best;
}

double h_eval(const WeightSequence& M, double t) {
  if (!(t > 0)) throw Error("negative-argument", "h_M needs t > 0");
  return std::exp(-omega_M(M, 1.0 / t));
}

double h_direct(const WeightSequence& M, double t) {
  const double lt = std::log(t);
  double best = 0.0;  // k = 0 term
  for (std::size_t k = 1; k <= M.horizon(); ++k) best = std::min(best, M.log_term(k) + double(k) * lt);
  return std::exp(best);
}

double kappa(const WeightFunction& w, double t, double tol) {
  if (t < 0) throw Error("negative-argument", "kappa needs t >= 0");
  if (t == 0) return 0.0;
  // kappa(t) = int_0^inf omega(t e^v) e^{-v} dv
  auto f = [&](double v) { return w(t * std::exp(v)) * std::exp(-v); };
  auto reachable = [&](double v) {
    try {
      w(t * std::exp(v));
      return true;
    } catch (const Error& e) {
      if (e.code() != "horizon-exhausted") throw;
      return false;
    }
  };
  // Finite-horizon sources: integrate up to the last reachable v, then a power-law tail.
  double v_end = 700.0;
  if (!reachable(v_end)) {
    if (!reachable(0.0)) throw Error("horizon-exhausted", "kappa argument beyond the horizon");
    double lo = 0.0, hi = v_end;
    for (int i = 0; i < 60; ++i) {
      double mid = 0.5 * (lo + hi);
      (reachable(mid) ? lo : hi) = mid;
    }
    v_end = lo;
  }
  double tail_beta = 0.0;
  if (v_end >= 700.0) {
    // Divergence screen: the integrand must decay on the sampled tail.
    double f1 = f(40.0), f2 = f(80.0), f3 = f(120.0);
    if (f2 > 0 && (f3 >= 0.5 * f2 || f2 >= 0.5 * f1))
      throw Error("divergent-tail", "omega grows at least linearly on the tail");
  } else {
    double a = std::max(0.0, v_end - 10.0);
    double wa = w(t * std::exp(a)), wb = w(t * std::exp(v_end));
    tail_beta = wa > 0 && wb > wa ? std::log(wb / wa) / (v_end - a) : 0.0;
    if (tail_beta >= 0.999) throw Error("divergent-tail", "omega grows at least linearly on the tail");
  }
  double total = 0.0, a = 0.0;
  for (double width = 4.0; a < v_end; a += width, width = std::min(width * 1.5, 64.0)) {
    double b = std::min(a + width, v_end), err = 0;
    double piece = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, tol, &err);
    total += piece;
    if (v_end < 700.0) continue;
    // tail bound: integrand decays at least like the last slope
    double end = f(b);
    if (end <= tol * std::fabs(total) && piece <= tol * std::fabs(total) * width) break;
  }
  if (v_end < 700.0) total += f(v_end) / (1.0 - tail_beta);
  return total;
}

// ---- diagnostics ----

json PropertyDiagnostics::to_json() const {
  auto one = [](const PropertyVerdict& v) {
    return json{{"holds", v.holds}, {"evidence", v.evidence}, {"witness", v.witness}};
  };
  return {{"omega1", one(omega1)}, {"omega3", one(omega3)}, {"omega4", one(omega4)},
          {"omega5", one(omega5)}, {"omega6", one(omega6)}, {"snq", one(snq)}, {"L", L}};
}

namespace {

double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
  double n = double(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i], sy += y[i], sxx += x[i] * x[i], sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Sup of v over grid prefixes reaching t_max^{1/4}, t_max^{1/2}, t_max.
std::array<double, 3> prefix_sups(const std::vector<double>& t, const std::vector<double>& v, double t_max) {
  std::array<double, 3> out{-kInf, -kInf, -kInf};
  double tops[3] = {std::pow(t_max, 0.25), std::sqrt(t_max), t_max * (1 + 1e-12)};
  for (std::size_t i = 0; i < t.size(); ++i)
    for (int k = 0; k < 3; ++k)
      if (t[i] <= tops[k]) out[k] = std::max(out[k], v[i]);
  return out;
}

}  // namespace

PropertyDiagnostics diagnostics(const WeightFunction& w, const DiagnosticsOptions& opt) {
  PropertyDiagnostics d;
  auto t = log_grid(1.0, opt.t_max, opt.n);
  std::vector<double> om(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) om[i] = w(t[i]);

  {  // (omega_1)
    std::vector<double> r(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) r[i] = w(2 * t[i]) / (om[i] + 1.0);
    auto s = prefix_sups(t, r, opt.t_max);
    d.L = std::max(1.0, s[2]);
    d.omega1.holds = !trend_diverges(s[0], s[1], s[2], 1e-3 * std::max(1.0, s[2]));
    d.omega1.evidence = "sup omega(2t)/(omega(t)+1) = " + std::to_string(s[2]);
    d.omega1.witness = {{"prefix_sups", s}};
  }
  {  // (omega_3): slope of log(log t / omega) against log log t
    std::vector<double> x, y;
    for (std::size_t i = t.size() / 2; i < t.size(); ++i)
      if (om[i] > 0 && t[i] > std::exp(1.0)) {
        x.push_back(std::log(std::log(t[i])));
        y.push_back(std::log(std::log(t[i]) / om[i]));
      }
    double sl = x.size() >= 2 ? slope_fit(x, y) : kInf;
    d.omega3.holds = sl < -0.05;
    d.omega3.evidence = "slope = " + std::to_string(sl);
    d.omega3.witness = {{"slope", sl}};
  }
  {  // (omega_4): midpoint convexity of phi(y) = omega(e^y) on the y-grid
    bool ok = true;
    std::size_t bad = 0;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
      double defect = om[i] - 0.5 * (om[i - 1] + om[i + 1]);
      if (defect > 1e-9 * std::max(1.0, std::fabs(om[i]))) {
        ok = false;
        bad = i;
        break;
      }
    }
    d.omega4.holds = ok;
    d.omega4.evidence = ok ? "midpoint convex on grid" : "violation at t = " + std::to_string(t[bad]);
    d.omega4.witness = {{"first_violation", ok ? json(nullptr) : json(t[bad])}};
  }
  {  // (omega_5): slope of log(omega/t) against log t
    std::vector<double> x, y;
    for (std::size_t i = t.size() / 2; i < t.size(); ++i)
      if (om[i] > 0) {
        x.push_back(std::log(t[i]));
        y.push_back(std::log(om[i] / t[i]));
      }
    double sl = x.size() >= 2 ? slope_fit(x, y) : kInf;
    d.omega5.holds = sl < -0.01;
    d.omega5.evidence = "slope = " + std::to_string(sl);
    d.omega5.witness = {{"slope", sl}};
  }
  {  // (omega_6): minimal H with 2 omega(t) <= omega(H t) + H
    std::vector<double> logH(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      auto ok = [&](double lh) { return 2 * om[i] <= w(std::exp(lh) * t[i]) + std::exp(lh) + 1e-12; };
      double lo = 0.0, hi = 1.0;
      if (ok(lo)) {
        logH[i] = 0.0;
        continue;
      }
      while (!ok(hi) && hi < 600) hi *= 2;
      if (!ok(hi)) {
        logH[i] = kInf;
        continue;
      }
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
      }
      logH[i] = hi;
    }
    auto s = prefix_sups(t, logH, opt.t_max);
    d.omega6.holds = std::isfinite(s[2]) && !trend_diverges(s[0], s[1], s[2], 0.05);
    d.omega6.evidence = "sup log H = " + std::to_string(s[2]);
    d.omega6.witness = {{"prefix_sup_logH", s}};
  }
  {  // (omega_snq): some K in {2,4,8,16} with top-decade max omega(Kt)/omega(t) < K
    json per = json::array();
    bool any = false;
    for (double K : {2.0, 4.0, 8.0, 16.0}) {
      double mx = 0;
      for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= opt.t_max / 10 && om[i] > 0) mx = std::max(mx, w(K * t[i]) / om[i]);
      per.push_back({{"K", K}, {"max_ratio", mx}});
      if (mx < K * (1 - 1e-9)) any = true;
    }
    d.snq.holds = any;
    d.snq.evidence = any ? "some K has ratio below K" : "no K in {2,4,8,16} works";
    d.snq.witness = per;
  }
  return d;
}

}  // namespace uh
