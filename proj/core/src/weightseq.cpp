#include "ultraholo/weightseq.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace uh {

WeightSequence::WeightSequence(std::vector<double> log_terms, std::string label)
    : log_terms_(std::move(log_terms)), label_(std::move(label)) {
  if (log_terms_.size() < 3) throw Error("horizon-too-small", "a weight sequence needs P >= 2");
  for (double v : log_terms_)
    if (!std::isfinite(v)) throw Error("non-finite", "log term is not finite");
  if (std::fabs(log_terms_[0]) > 1e-12) throw Error("not-normalized", "log M_0 must be 0");
  log_terms_[0] = 0.0;
}

WeightSequence WeightSequence::truncated(std::size_t P) const {
  P = std::min(P, horizon());
  return WeightSequence(std::vector<double>(log_terms_.begin(), log_terms_.begin() + P + 1), label_);
}

nlohmann::json WeightSequence::to_json() const {
  return {{"label", label_}, {"log_terms", log_terms_}};
}

WeightSequence WeightSequence::from_json(const nlohmann::json& j) {
  return WeightSequence(j.at("log_terms").get<std::vector<double>>(), j.value("label", std::string()));
}

std::string WeightSequence::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "p,log_M_p\n";
  for (std::size_t p = 0; p < log_terms_.size(); ++p) os << p << "," << log_terms_[p] << "\n";
  return os.str();
}

WeightSequence WeightSequence::from_csv(const std::string& text, std::string label) {
  std::istringstream is(text);
  std::string line;
  std::vector<double> v;
  while (std::getline(is, line)) {
    if (line.empty() || !(std::isdigit(static_cast<unsigned char>(line[0])))) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    std::size_t p = std::stoul(line.substr(0, comma));
    if (p != v.size()) throw Error("bad-csv", "indices must be consecutive from 0");
    v.push_back(std::stod(line.substr(comma + 1)));
  }
  return WeightSequence(std::move(v), std::move(label));
}

WeightSequence gevrey(double s, std::size_t P) {
  if (s < 1.0) throw Error("invalid-argument", "gevrey order must be >= 1");
  std::vector<double> v(P + 1);
  for (std::size_t p = 0; p <= P; ++p) v[p] = s * log_factorial(double(p));
  std::ostringstream os;
  os << "gevrey(" << s << ")";
  return WeightSequence(std::move(v), os.str());
}

WeightSequence divide_by_factorials(const WeightSequence& M, double power) {
  std::vector<double> v = M.log_terms();
  for (std::size_t p = 0; p < v.size(); ++p) v[p] -= power * log_factorial(double(p));
  return WeightSequence(std::move(v), M.label() + "/p!");
}

WeightSequence multiply_by_factorials(const WeightSequence& M, double power) {
  std::vector<double> v = M.log_terms();
  for (std::size_t p = 0; p < v.size(); ++p) v[p] += power * log_factorial(double(p));
  return WeightSequence(std::move(v), M.label() + "*p!");
}

QuotientView quotients(const WeightSequence& M) {
  QuotientView q;
  const auto& L = M.log_terms();
  q.log_mu.resize(L.size());
  q.log_mu[0] = 0.0;
  for (std::size_t p = 1; p < L.size(); ++p) q.log_mu[p] = L[p] - L[p - 1];
  return q;
}

WeightSequence log_convex_minorant(const WeightSequence& M) {
  // Lower hull by monotone chain; collinear points stay on the hull.
  const auto& L = M.log_terms();
  std::vector<std::size_t> hull;
  auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
    return (double(a) - double(o)) * (L[b] - L[o]) - (L[a] - L[o]) * (double(b) - double(o));
  };
  for (std::size_t i = 0; i < L.size(); ++i) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), i) < 0) hull.pop_back();
    hull.push_back(i);
  }
  std::vector<double> v(L.size());
  for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
    std::size_t a = hull[h], b = hull[h + 1];
    for (std::size_t p = a; p <= b; ++p) {
      double f = double(p - a) / double(b - a);
      v[p] = p == a ? L[a] : p == b ? L[b] : (1 - f) * L[a] + f * L[b];
    }
  }
  return WeightSequence(std::move(v), M.label() + "^lc");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::HoldsOnHorizon: return "holds-on-horizon";
    case Verdict::FailsAtIndex: return "fails-at-index";
    case Verdict::TrendDiverges: return "trend-diverges";
    case Verdict::TrendBounded: return "trend-bounded";
  }
  return "?";
}

nlohmann::json PredicateReport::to_json() const {
  nlohmann::json j{{"id", id}, {"verdict", to_string(verdict)}, {"value", value}};
  if (index) j["index"] = *index;
  nlohmann::json s = nlohmann::json::array();
  for (auto& pt : series) s.push_back({{"horizon", pt.horizon}, {"value", pt.value}});
  j["series"] = s;
  if (!extra.is_null()) j["extra"] = extra;
  return j;
}

bool trend_diverges(double v1, double v2, double v3, double tol) {
  double d1 = v2 - v1, d2 = v3 - v2;
  return d2 > tol && d2 > 0.75 * d1;
}

namespace {

constexpr double kSlack = 1e-9;

PredicateReport convexity(const std::vector<double>& L, const std::string& id) {
  PredicateReport r;
  r.id = id;
  double worst = 0.0;
  for (std::size_t p = 1; p + 1 < L.size(); ++p) {
    double defect = 2 * L[p] - L[p - 1] - L[p + 1];
    double scale = std::max({1.0, std::fabs(L[p - 1]), std::fabs(L[p + 1])});
    if (defect > kSlack * scale) {
      r.verdict = Verdict::FailsAtIndex;
      r.index = p;
      r.value = defect;
      return r;
    }
    worst = std::max(worst, defect);
  }
  r.value = worst;
  return r;
}

// log sup_{j,k>=1, j+k<=P} (M_{j+k}/(M_j M_k))^{1/(j+k)}
double mg_log_sup(const std::vector<double>& L, std::size_t P, std::size_t* arg = nullptr) {
  double best = -kInf;
  for (std::size_t n = 2; n <= P; ++n)
    for (std::size_t j = 1; j <= n / 2; ++j) {
      double v = (L[n] - L[j] - L[n - j]) / double(n);
      if (v > best) {
        best = v;
        if (arg) *arg = n;
      }
    }
  return best;
}

double gamma1_sup(const std::vector<double>& logmu, std::size_t P, std::size_t* arg = nullptr) {
  // sup_p (mu_p/p) sum_{k=p}^{P} 1/mu_k via a backward running sum.
  double tail = 0.0, best = -kInf;
  for (std::size_t p = P; p >= 1; --p) {
    tail += std::exp(-logmu[p]);
    double v = std::exp(logmu[p]) / double(p) * tail;
    if (v > best) {
      best = v;
      if (arg) *arg = p;
    }
  }
  return best;
}

}  // namespace

PredicateReport predicate(const WeightSequence& M, const std::string& id, const PredicateOptions& opt) {
  const auto& L = M.log_terms();
  const std::size_t P = M.horizon();
  if (id == "lc") return convexity(L, "lc");
  if (id == "slc") return convexity(divide_by_factorials(M).log_terms(), "slc");

  if (id == "mg" || id == "gamma1") {
    if (P < 8) throw Error("horizon-too-small", "trend predicates need P >= 8");
    auto logmu = quotients(M).log_mu;
    PredicateReport r;
    r.id = id;
    std::size_t hs[3] = {P / 4, P / 2, P};
    double v[3];
    std::size_t arg = 0;
    for (int i = 0; i < 3; ++i) {
      v[i] = id == "mg" ? mg_log_sup(L, hs[i], &arg) : gamma1_sup(logmu, hs[i], &arg);
      r.series.push_back({hs[i], id == "mg" ? std::exp(v[i]) : v[i]});
    }
    r.index = arg;
    r.value = r.series.back().value;
    r.verdict = trend_diverges(v[0], v[1], v[2]) ? Verdict::TrendDiverges : Verdict::TrendBounded;
    return r;
  }

  if (id == "beta1") {
    if (P < 10) throw Error("horizon-too-small", "beta tests need P >= 10");
    auto logmu = quotients(M).log_mu;
    const std::size_t k = std::size_t(opt.k);
    std::size_t hi = P / k, lo = std::max<std::size_t>(1, std::size_t(std::ceil(0.75 * double(hi))));
    PredicateReport r;
    r.id = "beta1";
    double best = kInf;
    std::size_t arg = lo;
    for (std::size_t p = lo; p <= hi; ++p) {
      double v = logmu[k * p] - logmu[p];
      if (v < best) best = v, arg = p;
    }
    r.value = std::exp(best);
    r.index = arg;
    r.extra = {{"k", opt.k}, {"window", {lo, hi}}};
    r.verdict = r.value > double(k) * (1 + 1e-9) ? Verdict::HoldsOnHorizon : Verdict::FailsAtIndex;
    return r;
  }

  if (id == "beta2") {
    if (P < 10) throw Error("horizon-too-small", "beta tests need P >= 10");
    auto logmu = quotients(M).log_mu;
    PredicateReport r;
    r.id = "beta2";
    nlohmann::json perk = nlohmann::json::array();
    double best = kInf;
    std::size_t best_p = 1;
    for (int kk = 2; kk <= opt.k_max; ++kk) {
      std::size_t k = std::size_t(kk);
      std::size_t hi = P / k, lo = std::max<std::size_t>(1, std::size_t(std::ceil(0.75 * double(hi))));
      if (hi < 1) break;
      double mx = -kInf;
      std::size_t arg = lo;
      for (std::size_t p = lo; p <= hi; ++p) {
        double v = (L[k * p] - L[p]) / (double(p) * double(k - 1)) - logmu[k * p];
        if (v > mx) mx = v, arg = p;
      }
      perk.push_back({{"k", kk}, {"limsup_proxy", std::exp(mx)}, {"argmax_p", arg}});
      if (mx < best) best = mx, best_p = arg;
    }
    r.value = std::exp(best);
    r.index = best_p;
    r.extra = {{"per_k", perk}, {"eps", opt.eps}};
    r.verdict = r.value <= opt.eps ? Verdict::HoldsOnHorizon : Verdict::FailsAtIndex;
    return r;
  }
  throw Error("unknown-predicate", id);
}

nlohmann::json RelationReport::to_json() const {
  return {{"headline", headline}, {"le", le}, {"lesssim", lesssim}, {"approx", approx},
          {"preceq", preceq}, {"simeq", simeq}, {"root_sup", root_sup},
          {"root_sup_rev", root_sup_rev}, {"quot_sup", quot_sup}, {"quot_sup_rev", quot_sup_rev}};
}

namespace {

// Bounded-on-trend sup_{1<=p<=P'} of d(p) for P' in {P/4, P/2, P}.
bool bounded_sup(const std::vector<double>& d, double* sup) {
  std::size_t P = d.size() - 1;
  std::size_t hs[3] = {P / 4, P / 2, P};
  double v[3];
  for (int i = 0; i < 3; ++i) {
    double m = -kInf;
    for (std::size_t p = 1; p <= hs[i]; ++p) m = std::max(m, d[p]);
    v[i] = m;
  }
  *sup = v[2];
  return !trend_diverges(v[0], v[1], v[2]);
}

}  // namespace

RelationReport relation(const WeightSequence& M, const WeightSequence& N) {
  if (M.horizon() != N.horizon()) throw Error("horizon-mismatch", "relation needs equal horizons");
  const std::size_t P = M.horizon();
  const auto &A = M.log_terms(), &B = N.log_terms();
  auto ma = quotients(M).log_mu, nb = quotients(N).log_mu;
  std::vector<double> root(P + 1), rroot(P + 1), q(P + 1), rq(P + 1);
  RelationReport r;
  r.le = true;
  for (std::size_t p = 1; p <= P; ++p) {
    root[p] = (A[p] - B[p]) / double(p);
    rroot[p] = -root[p];
    q[p] = ma[p] - nb[p];
    rq[p] = -q[p];
    if (A[p] - B[p] > 1e-12 * std::max(1.0, std::fabs(B[p]))) r.le = false;
  }
  double s1, s2, s3, s4;
  r.lesssim = bounded_sup(root, &s1);
  bool rev = bounded_sup(rroot, &s2);
  r.preceq = bounded_sup(q, &s3);
  bool qrev = bounded_sup(rq, &s4);
  r.root_sup = std::exp(s1);
  r.root_sup_rev = std::exp(s2);
  r.quot_sup = std::exp(s3);
  r.quot_sup_rev = std::exp(s4);
  r.simeq = r.preceq && qrev;
  r.approx = (r.lesssim && rev) || r.simeq;
  r.lesssim = r.lesssim || r.preceq || r.le;
  if (r.simeq) r.headline = "≃";
  else if (r.approx) r.headline = "≈";
  else if (r.preceq) r.headline = "≼";
  else if (r.lesssim) r.headline = "≾";
  else if (r.le) r.headline = "≤";
  else r.headline = "incomparable";
  return r;
}

// ---- pathological example ----

std::vector<std::int64_t> default_pathological_seed() { return {2, 3, 6, 18, 72, 360, 2160}; }

namespace {

double slope(const std::vector<std::int64_t>& a, std::size_t j) {
  // j = 0: (0,0) to (a_1, log a_1!); j >= 1: anchors j and j+1 (1-based).
  if (j == 0) return log_factorial(double(a[0])) / double(a[0]);
  double y0 = double(j) * log_factorial(double(a[j - 1]));
  double y1 = double(j + 1) * log_factorial(double(a[j]));
  return (y1 - y0) / double(a[j] - a[j - 1]);
}

}  // namespace

void validate_pathological_anchors(const std::vector<std::int64_t>& a) {
  if (a.empty() || a[0] < 1) throw Error("invalid-anchors", "need a_1 >= 1");
  for (std::size_t i = 1; i < a.size(); ++i) {
    std::int64_t j = std::int64_t(i);  // a[i] is a_{j+1}
    if (a[i] <= a[i - 1] || a[i] < a[i - 1] * j)
      throw Error("invalid-anchors", "a_{j+1} >= a_j*j violated at j=" + std::to_string(j));
  }
  for (std::size_t j = 1; j < a.size(); ++j)
    if (slope(a, j) < slope(a, j - 1) - 1e-12)
      throw Error("anchor-slope-violation", "slope decreases at j=" + std::to_string(j));
}

std::vector<std::int64_t> pathological_anchors(std::vector<std::int64_t> a, std::int64_t cover) {
  if (a.empty()) a = {2};
  validate_pathological_anchors(a);
  while (a.back() < cover) {
    std::int64_t j = std::int64_t(a.size());
    std::int64_t next = std::max(a.back() * j, a.back() + 1);
    a.push_back(next);
    while (slope(a, a.size() - 1) < slope(a, a.size() - 2)) a.back() += 1;
  }
  return a;
}

double pathological_f(const std::vector<std::int64_t>& a, double p) {
  if (p <= 0) return 0.0;
  if (p <= double(a[0])) return p * slope(a, 0);
  auto it = std::lower_bound(a.begin(), a.end(), std::int64_t(std::ceil(p)));
  if (it == a.end()) throw Error("horizon-exhausted", "anchors do not cover p");
  std::size_t j = std::size_t(it - a.begin());  // a[j-1] < p <= a[j]
  double y0 = double(j) * log_factorial(double(a[j - 1]));
  return y0 + (p - double(a[j - 1])) * slope(a, j);
}

WeightSequence pathological_sequence(double q, std::vector<std::int64_t> anchors, std::size_t P) {
  if (q < std::exp(1.0) - 1e-12) throw Error("invalid-argument", "q must be >= e");
  anchors = pathological_anchors(std::move(anchors), std::int64_t(P));
  std::vector<double> v(P + 1);
  const double lq = std::log(q);
  for (std::size_t p = 0; p <= P; ++p) v[p] = pathological_f(anchors, double(p)) * lq;
  return WeightSequence(std::move(v), "pathological");
}

}  // namespace uh
