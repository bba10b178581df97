#include "ultraholo/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "ultraholo/conjugate.hpp"
#include "ultraholo/extension.hpp"
#include "ultraholo/flatkernel.hpp"
#include "ultraholo/indices.hpp"
#include "ultraholo/parallel.hpp"
#include "ultraholo/wmatrix.hpp"

namespace uh {

using json = nlohmann::json;

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Exact: return "exact";
    case Strategy::Fitted: return "fitted";
    case Strategy::Tolerance: return "tolerance";
  }
  return "?";
}

struct CheckCache {
  std::once_flag flat_once, ext_once;
  std::optional<FlatFunctionModel> flat;
  SandwichFit sandwich;
  std::optional<ExtensionModel> ext;
  std::string flat_code, flat_what, ext_code, ext_what;
};

namespace {

SourcePtr parse_source(const json& j) {
  if (j.is_object()) return source_from_json(j);
  std::string s = j.get<std::string>();
  auto colon = s.find(':');
  std::string head = s.substr(0, colon), arg = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (head == "gevrey") return gevrey_source(arg.empty() ? 1.0 : std::stod(arg));
  if (head == "pathological") return pathological_source(arg.empty() ? std::exp(1.0) : std::stod(arg));
  throw Error("bad-spec", "unknown sequence spec " + s);
}

WeightFunction parse_weight(const json& j) {
  return j.is_object() ? WeightFunction::from_json(j) : WeightFunction::parse(j.get<std::string>());
}

}  // namespace

json CheckContext::to_json() const {
  return {{"version", 1},          {"omega", omega.to_json()}, {"sequence", sequence->to_json()},
          {"pathological", pathological->to_json()}, {"tau", tau.to_json()}, {"gamma", gamma},
          {"x", x},                {"h", h},                   {"target", target},
          {"precision", precision}, {"seed", seed},            {"horizon", horizon},
          {"tol", tol}};
}

CheckContext CheckContext::from_json(const json& j) {
  if (j.contains("version") && j.at("version").get<int>() != 1)
    throw Error("bad-spec", "unsupported context version");
  CheckContext c;
  if (j.contains("omega")) c.omega = parse_weight(j.at("omega"));
  if (j.contains("sequence")) c.sequence = parse_source(j.at("sequence"));
  if (j.contains("pathological")) c.pathological = parse_source(j.at("pathological"));
  if (j.contains("tau")) c.tau = parse_weight(j.at("tau"));
  c.gamma = j.value("gamma", c.gamma);
  c.x = j.value("x", c.x);
  c.h = j.value("h", c.h);
  c.target = j.value("target", c.target);
  c.precision = j.value("precision", c.precision);
  c.seed = j.value("seed", c.seed);
  c.horizon = j.value("horizon", c.horizon);
  c.tol = j.value("tol", c.tol);
  return c;
}

namespace {

constexpr double kE = 2.718281828459045;

double uniform01(std::mt19937_64& g) { return double(g() >> 11) * 0x1.0p-53; }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

BoundFit table(std::string id, std::vector<std::string> columns) {
  BoundFit f;
  f.id = std::move(id);
  f.columns = std::move(columns);
  return f;
}

// M / G^a as a source; closed forms stay closed.
SourcePtr divided_source(const SourcePtr& M, double a) {
  json j = M->to_json();
  std::string kind = j.value("kind", "");
  if (kind == "gevrey" && j.at("s").get<double>() >= a) return gevrey_source(j.at("s").get<double>() - a);
  if (kind == "factorial_shift" && j.at("c").get<double>() >= a) {
    double c = j.at("c").get<double>() - a;
    auto base = source_from_json(j.at("base"));
    return c == 0 ? base : factorial_shift_source(base, c);
  }
  std::size_t P = std::size_t(std::min<std::int64_t>(M->horizon(), 4096));
  return table_source(divide_by_factorials(M->materialize(P), a));
}

// Smallest C >= 1 with a <= C b + C and b <= C a + C on the samples.
double equivalence_constant(const std::vector<double>& a, const std::vector<double>& b, std::size_t n) {
  double C = 1.0;
  for (std::size_t i = 0; i < n; ++i) C = std::max({C, a[i] / (b[i] + 1.0), b[i] / (a[i] + 1.0)});
  return C;
}

// Fits the equivalence constant of two functions on [lo, T] and [lo, sqrt(lo T)].
BoundFit equivalence_fit(std::string id, const std::function<double(double)>& f,
                         const std::function<double(double)>& g, double lo, double T, std::size_t n = 200) {
  BoundFit fit = table(std::move(id), {"t", "lhs", "rhs"});
  auto ts = log_grid(lo, T, n);
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = f(ts[i]);
    b[i] = g(ts[i]);
    fit.rows.push_back({ts[i], a[i], b[i]});
  }
  double C = equivalence_constant(a, b, n), Ch = equivalence_constant(a, b, n / 2 + 1);
  fit.constants = {{"C", C}, {"C_half_range", Ch}, {"t_max", T}};
  fit.worst_margin = 0;
  fit.stable = stable_pair(C, Ch);
  fit.passed = fit.stable;
  if (!fit.stable) fit.note = "equivalence constant grows with the range";
  return fit;
}

bool all_passed(const std::vector<BoundFit>& fs) {
  return std::all_of(fs.begin(), fs.end(), [](auto& f) { return f.passed; });
}
bool all_stable(const std::vector<BoundFit>& fs) {
  return std::all_of(fs.begin(), fs.end(), [](auto& f) { return f.stable; });
}

CheckOutcome from_fits(std::vector<BoundFit> fs) {
  CheckOutcome o;
  o.passed = all_passed(fs);
  o.stable = all_stable(fs);
  o.fits = std::move(fs);
  return o;
}

double slack(const CheckContext& c, double v) { return c.tol * std::max(1.0, std::fabs(v)); }

// Pairs (M, m) with M = p! m used by the a = 1 conjugate checks.
std::vector<std::pair<std::string, std::pair<SourcePtr, SourcePtr>>> sequence_pairs(const CheckContext& c) {
  return {{c.sequence->label(), {c.sequence, divided_source(c.sequence, 1.0)}},
          {"p!*" + c.pathological->label(), {factorial_shift_source(c.pathological, 1.0), c.pathological}}};
}

// ---- matrix checks ----

CheckOutcome run_mg(const CheckContext& c) {
  WeightMatrix W(c.omega, default_index_grid(), c.horizon);
  std::vector<BoundFit> fs;
  for (double l : {0.5, 1.0, 2.0}) {
    auto f = check_mg_across_levels(W, l, 60);
    f.id += "@l=" + fmt(l);
    fs.push_back(std::move(f));
  }
  return from_fits(std::move(fs));
}

CheckOutcome run_absorption(const CheckContext& c) {
  WeightMatrix W(c.omega, default_index_grid(), c.horizon);
  std::vector<BoundFit> fs;
  for (auto [h, l] : {std::pair{2.0, 1.0}, {kE, 1.0}, {kE, 0.5}}) {
    auto f = check_absorption(W, h, l);
    f.id += "@h=" + fmt(h) + ",l=" + fmt(l);
    fs.push_back(std::move(f));
  }
  return from_fits(std::move(fs));
}

CheckOutcome run_assoc(const CheckContext& c) {
  WeightMatrix W(c.omega, default_index_grid(), c.horizon);
  std::vector<BoundFit> fs;
  for (double x : {0.5, 1.0, 2.0}) {
    auto Wx = W.level_covering(x, 1e4 * kE);
    BoundFit f = table("assoc-equiv@x=" + fmt(x), {"t", "omega", "omega_Wx", "lower_slack", "upper_gap"});
    double worst = kInf, C = -kInf, Cshort = -kInf;
    for (double t : log_grid(1.0, 1e4, 200)) {
      double w = c.omega(t), wx = omega_M(Wx, t);
      double lower = w - x * wx + slack(c, w), gap = w - 2 * x * wx;
      worst = std::min(worst, lower);
      C = std::max(C, gap);
      if (t <= 1e2) Cshort = std::max(Cshort, gap);
      f.rows.push_back({t, w, wx, lower, gap});
    }
    C = std::max(1.0, C);
    Cshort = std::max(1.0, Cshort);
    f.constants = {{"C_x", C}, {"C_x_short_range", Cshort}};
    f.worst_margin = worst;
    f.stable = stable_pair(C, Cshort);
    f.passed = f.stable && worst >= 0;
    if (worst < 0) f.note = "left inequality violated";
    fs.push_back(std::move(f));
  }
  return from_fits(std::move(fs));
}

CheckOutcome run_hm(const CheckContext& c) {
  WeightMatrix W(c.omega, default_index_grid(), c.horizon);
  std::vector<BoundFit> fs;
  bool exact = true;
  for (double x : {0.5, 1.0, 2.0}) {
    auto Wx = W.level_covering(x, 1e4 * kE);
    BoundFit f = table("hm-bounds@x=" + fmt(x), {"t", "minus_omega_iota", "x_log_h", "lower_slack", "upper_gap"});
    double worst = kInf, C = -kInf, Cshort = -kInf;
    for (double t : log_grid(1e-4, 1.0, 200)) {
      double wi = c.omega(1.0 / t);
      double hd = h_direct(Wx, t);
      double lh = hd > 0 ? std::log(hd) : -omega_M(Wx, 1.0 / t);
      double lower = x * lh + wi + slack(c, wi), gap = 2 * x * lh + wi;
      worst = std::min(worst, lower);
      C = std::max(C, gap);
      if (t >= 1e-2) Cshort = std::max(Cshort, gap);
      f.rows.push_back({t, -wi, x * lh, lower, gap});
    }
    C = std::max(1.0, C);
    Cshort = std::max(1.0, Cshort);
    f.constants = {{"C_x", C}, {"C_x_short_range", Cshort}};
    f.worst_margin = worst;
    f.stable = stable_pair(C, Cshort);
    f.passed = worst >= 0;
    exact = exact && f.passed;
    fs.push_back(std::move(f));
  }
  CheckOutcome o = from_fits(std::move(fs));
  o.passed = exact;
  return o;
}

// ---- conjugate checks ----

CheckOutcome run_dynkin_a(const CheckContext& c) {
  auto wM = from_sequence(c.sequence);
  std::vector<BoundFit> fs;
  for (double a : {0.5, 1.0}) {
    auto Ma = divided_source(c.sequence, a);
    auto ram = ramified(wM, a);
    BoundFit f = table("dynkin-a@a=" + fmt(a), {"s", "lower", "middle", "upper"});
    double worst = kInf;
    for (double s : log_grid(1e-2, 1e2, 40)) {
      double lo = upper_star(ram, s), mid = omega_M(*Ma, std::pow(a, a) / std::pow(s, a)),
             hi = upper_star(ram, s / kE);
      double tol = 1e-8 * std::max(1.0, std::fabs(mid));
      worst = std::min({worst, mid - lo + tol, hi - mid + tol});
      f.rows.push_back({s, lo, mid, hi});
    }
    f.worst_margin = worst;
    f.stable = true;
    f.passed = worst >= 0;
    fs.push_back(std::move(f));
  }
  return from_fits(std::move(fs));
}

CheckOutcome run_dynkin_a1(const CheckContext& c) {
  std::vector<BoundFit> fs;
  for (auto& [name, pr] : sequence_pairs(c)) {
    auto wM = from_sequence(pr.first);
    const auto& m = *pr.second;
    BoundFit f = table("dynkin-a1@" + name, {"s", "lower", "middle", "upper"});
    double worst = kInf;
    for (double s : log_grid(1e-2, 10.0, 40)) {
      double lo = upper_star(wM, s), mid = omega_M(m, 1.0 / s), hi = upper_star(wM, s / kE);
      double tol = 1e-8 * std::max(1.0, std::fabs(mid));
      worst = std::min({worst, mid - lo + tol, hi - mid + tol});
      f.rows.push_back({s, lo, mid, hi});
    }
    f.worst_margin = worst;
    f.stable = true;
    f.passed = worst >= 0;
    fs.push_back(std::move(f));
  }
  return from_fits(std::move(fs));
}

CheckOutcome run_conj_monotone(const CheckContext& c) {
  std::mt19937_64 g(c.seed);
  std::vector<BoundFit> fs;
  for (int i = 0; i < 5; ++i) {
    double A = 0.5 + 3.5 * uniform01(g), B = 3.0 * uniform01(g);
    auto tau = sum({scaled(A, c.omega), constant(B)});
    BoundFit f = table("conj-monotone#" + std::to_string(i), {"s", "tau_star", "bound"});
    f.constants = {{"A", A}, {"B", B}};
    double worst = kInf;
    for (double s : log_grid(1e-3, 1e2, 40)) {
      double lhs = upper_star(tau, s, ConjMode::Numeric), rhs = A * upper_star(c.omega, s / A) + B;
      worst = std::min(worst, rhs - lhs + 1e-8 * std::max(1.0, std::fabs(rhs)));
      f.rows.push_back({s, lhs, rhs});
    }
    f.worst_margin = worst;
    f.stable = true;
    f.passed = worst >= 0;
    fs.push_back(std::move(f));
  }
  return from_fits(std::move(fs));
}

CheckOutcome run_lc_minorant(const CheckContext& c) {
  std::vector<BoundFit> fs;
  const std::size_t P = 40;
  for (auto& [name, pr] : sequence_pairs(c)) {
    const auto& m = pr.second;
    auto W = lower_star_of(inversion(from_sequence(m)));
    BoundFit f = table("lc-minorant-identity@" + name, {"p", "log_N", "log_L", "stirling_residual"});
    double C = 1, Ch = 1, resid = 0;
    for (std::size_t p = 1; p <= P; ++p) {
      double dp = double(p);
      double lN = phi_star(W, dp, ConjMode::Numeric);
      double lL = log_factorial(dp) + m->log_term(std::int64_t(p));
      // The sup is attained in closed form: N_p = p^p e^{-p} m^lc_p.
      double r = lN - (dp * std::log(dp) - dp + m->log_term(std::int64_t(p)));
      resid = std::max(resid, std::fabs(r) / std::max(1.0, std::fabs(lN)));
      double cp = std::exp(std::fabs(lN - lL) / dp);
      C = std::max(C, cp);
      if (p <= P / 2) Ch = std::max(Ch, cp);
      f.rows.push_back({dp, lN, lL, r});
    }
    f.constants = {{"C", C}, {"C_half_horizon", Ch}, {"max_relative_stirling_residual", resid}};
    f.worst_margin = -std::log(C);
    f.stable = stable_pair(C, Ch);
    f.passed = f.stable;
    fs.push_back(std::move(f));
  }
  return from_fits(std::move(fs));
}

CheckOutcome run_concave_equiv(const CheckContext& c) {
  std::vector<BoundFit> fs;
  for (auto& [name, pr] : sequence_pairs(c)) {
    const auto& M = *pr.first;
    auto hm = inversion(from_sequence(pr.second));
    BoundFit f = table("concave-equiv@" + name, {"x", "omega_M", "lower_star", "one_plus_omega_M_ex"});
    double mu1 = std::exp(M.log_mu(1)), worst = kInf;
    for (double x : log_grid(std::max(mu1, 1e-3), 1e6, 60)) {
      double lo = omega_M(M, x), mid = lower_star(hm, x), hi = 1.0 + omega_M(M, kE * x);
      double s = slack(c, mid);
      worst = std::min({worst, mid - lo + s, hi - mid + s});
      f.rows.push_back({x, lo, mid, hi});
    }
    f.worst_margin = worst;
    f.stable = true;
    f.passed = worst >= 0;
    fs.push_back(std::move(f));
  }
  return from_fits(std::move(fs));
}

CheckOutcome run_L_equiv(const CheckContext& c) {
  std::vector<BoundFit> fs;
  for (auto& [name, pr] : sequence_pairs(c)) {
    // m is log-convex for every source, so L = p! m^lc is the source M itself.
    auto L = pr.first;
    auto hm = inversion(from_sequence(pr.second));
    double mu1 = std::exp(L->log_mu(1));
    fs.push_back(equivalence_fit(
        "L-equiv@" + name, [&](double t) { return omega_M(*L, t); }, [&](double t) { return lower_star(hm, t); },
        std::max(1.0, mu1), 1e8));
  }
  return from_fits(std::move(fs));
}

CheckOutcome run_Wx_Lx(const CheckContext& c) {
  WeightMatrix W(c.omega, default_index_grid(), c.horizon);
  std::vector<BoundFit> fs;
  for (double x : {0.5, 1.0, 2.0}) {
    auto Wx = W.level_covering(x, 1e8);
    auto Lx = multiply_by_factorials(log_convex_minorant(divide_by_factorials(Wx)));
    double top = std::min(Wx.log_term(Wx.horizon()) - Wx.log_term(Wx.horizon() - 1),
                          Lx.log_term(Lx.horizon()) - Lx.log_term(Lx.horizon() - 1));
    double T = std::min(1e6, std::exp(top - 1.0));
    fs.push_back(equivalence_fit(
        "Wx-Lx-equiv@x=" + fmt(x), [&](double t) { return omega_M(Wx, t); },
        [&](double t) { return omega_M(Lx, t); }, 1.0, T));
  }
  return from_fits(std::move(fs));
}

CheckOutcome run_snq(const CheckContext& c) {
  auto d = diagnostics(c.omega);
  BoundFit f = table("snq-char", {"t", "kappa_over_omega"});
  bool integral = true;
  std::string why;
  try {
    std::vector<double> r;
    for (double t : {1e2, 1e4, 1e6, 1e8}) {
      double w = c.omega(t);
      double v = kappa(c.omega, t) / std::max(w, 1e-300);
      r.push_back(v);
      f.rows.push_back({t, v});
    }
    integral = r.back() <= 1.5 * r[1];
    if (!integral) why = "kappa/omega grows";
  } catch (const Error& e) {
    integral = false;
    why = e.code();
  }
  CheckOutcome o;
  f.constants = {{"scan_verdict", d.snq.holds}, {"integral_verdict", integral}};
  f.stable = true;
  f.passed = d.snq.holds == integral;
  f.note = why;
  o.passed = f.passed;
  o.details = {{"scan", d.snq.evidence}};
  o.fits.push_back(std::move(f));
  return o;
}

BoundFit identity_table(std::string id, const IdentityReport& r) {
  BoundFit f = table(std::move(id), {"row", "lhs", "rhs", "tolerance", "agrees"});
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    auto& x = r.rows[i];
    f.rows.push_back({double(i), x.lhs, x.rhs, x.tolerance, x.agrees ? 1.0 : 0.0});
  }
  f.stable = true;
  f.passed = r.all_agree();
  return f;
}

CheckOutcome run_index(const CheckContext& c) {
  auto r1 = check_index_identities(c.omega);
  auto M = c.sequence->materialize(c.horizon);
  auto r2 = check_index_identities(M, divided_source(c.sequence, 1.0), c.sequence);
  CheckOutcome o;
  o.fits.push_back(identity_table("index-identities@weight", r1));
  o.fits.push_back(identity_table("index-identities@sequence", r2));
  o.passed = r1.all_agree() && r2.all_agree();
  o.details = {{"weight", r1.to_json()}, {"sequence", r2.to_json()}};
  return o;
}

CheckOutcome run_tau_matrix(const CheckContext& c) {
  WeightMatrix T(c.tau, default_index_grid(), c.horizon);
  std::vector<BoundFit> fs;
  for (double x : {0.5, 1.0, 2.0}) {
    auto Tx = T.level(x, 4096);
    double top = Tx.log_term(Tx.horizon()) - Tx.log_term(Tx.horizon() - 1);
    double T_use = std::min(1e6, std::exp(top - 1.0));
    fs.push_back(equivalence_fit(
        "tau-matrix-equiv@x=" + fmt(x), [&](double t) { return c.tau(t); },
        [&](double t) { return omega_M(Tx, t); }, 1.0, T_use));
  }
  return from_fits(std::move(fs));
}

CheckOutcome run_hat_matrix(const CheckContext& c) {
  std::vector<double> grid{0.5, 1.0, 2.0, 4.0, 8.0};
  WeightMatrix T(c.tau, grid, c.horizon);
  auto That = T.hat();
  auto T1 = That.level(1.0, 4096);
  WeightMatrix Omega(from_sequence(table_source(T1)), grid, c.horizon);
  auto eq = matrix_equivalence(That, Omega);
  BoundFit f = table("hat-matrix-equiv", {"direction", "x", "y", "constant"});
  for (auto& p : eq.forward) f.rows.push_back({0.0, p.x, p.y, p.constant});
  for (auto& p : eq.backward) f.rows.push_back({1.0, p.x, p.y, p.constant});
  f.constants = {{"verdict", eq.verdict}};
  f.stable = f.passed = eq.verdict == "{≈}";
  if (!f.passed) f.note = "no two-sided pairing on the grid";
  CheckOutcome o = from_fits({f});
  o.details = eq.to_json();
  return o;
}

// ---- kernel and extension checks ----

CheckCache& cache_of(const CheckContext& c) {
  if (!c.cache) throw Error("internal", "context cache missing");
  return *c.cache;
}

const FlatFunctionModel& flat_model(const CheckContext& c, SandwichFit* sw = nullptr) {
  auto& k = cache_of(c);
  std::call_once(k.flat_once, [&] {
    try {
      k.flat = build_model(c.tau, c.gamma, 1.0 / (2.0 * c.x));
      k.sandwich = verify_flat_sandwich(*k.flat);
    } catch (const Error& e) {
      k.flat.reset();
      k.flat_code = e.code();
      k.flat_what = e.what();
    }
  });
  if (!k.flat) throw Error(k.flat_code, k.flat_what);
  if (sw) *sw = k.sandwich;
  return *k.flat;
}

const ExtensionModel& extension_model(const CheckContext& c) {
  auto& k = cache_of(c);
  std::call_once(k.ext_once, [&] {
    try {
      ExtensionOptions opt;
      opt.precision = c.precision;
      WeightMatrix T(c.tau, default_index_grid(), c.horizon);
      auto target = named_target(c.target, T, c.x, c.h, opt.p_max, c.seed);
      k.ext = build_extension(target, c.tau, c.gamma, opt);
    } catch (const Error& e) {
      k.ext_code = e.code();
      k.ext_what = e.what();
    }
  });
  if (!k.ext) throw Error(k.ext_code, k.ext_what);
  return *k.ext;
}

CheckOutcome run_flat_sandwich(const CheckContext& c) {
  SandwichFit sw;
  flat_model(c, &sw);
  CheckOutcome o = from_fits({sw.fit});
  o.details = {{"K1", sw.K1}, {"K2", sw.K2}, {"K3", sw.K3}};
  return o;
}

CheckOutcome run_optimal_lower(const CheckContext& c) {
  SandwichFit sw;
  const auto& m = flat_model(c, &sw);
  return from_fits({verify_optimal_lower(m, sw.K2)});
}

CheckOutcome run_kernel_integrability(const CheckContext& c) {
  return from_fits({verify_kernel_integrability(flat_model(c))});
}

CheckOutcome run_kernel_decay(const CheckContext& c) { return from_fits({verify_kernel_decay(flat_model(c))}); }

CheckOutcome run_moment_sandwich(const CheckContext& c) {
  SandwichFit sw;
  const auto& m = flat_model(c, &sw);
  return from_fits({verify_moment_sandwich(m, sw.K2, sw.K3, 15)});
}

CheckOutcome run_remainder(const CheckContext& c) { return from_fits({remainder_check(extension_model(c))}); }

CheckOutcome run_borel(const CheckContext& c) {
  auto rep = borel_check(extension_model(c), 4);
  BoundFit f = table("borel-rightinverse", {"p", "re_lambda", "im_lambda", "re_estimate", "im_estimate", "tolerance", "ok"});
  for (auto& r : rep.rows)
    f.rows.push_back({double(r.p), r.lambda.real(), r.lambda.imag(), r.estimate.real(), r.estimate.imag(),
                      r.tolerance, r.ok ? 1.0 : 0.0});
  f.stable = true;
  f.passed = rep.passed;
  CheckOutcome o = from_fits({f});
  o.details = rep.to_json();
  return o;
}

// The half-plane bounds need gamma > 1; the construction feeds them tau^{1/s}, gamma(tau^{1/s}) = s gamma(tau).
WeightFunction snq_weight(const CheckContext& c) { return ramified(c.tau, 1.0 / flat_model(c).s()); }

CheckOutcome run_integrability(const CheckContext& c) {
  CheckOutcome o = from_fits({verify_integrability(snq_weight(c))});
  o.details = {{"s", flat_model(c).s()}};
  return o;
}

CheckOutcome run_poisson(const CheckContext& c) {
  CheckOutcome o = from_fits({verify_poisson_tail(snq_weight(c))});
  o.details = {{"s", flat_model(c).s()}};
  return o;
}

// ---- sequence checks ----

CheckOutcome run_pathological(const CheckContext& c) {
  json src = c.pathological->to_json();
  if (src.value("kind", "") != "pathological") throw Error("bad-operand", "pathological check needs a pathological source");
  auto anchors = pathological_anchors(src.at("anchors").get<std::vector<std::int64_t>>(), 1 << 20);
  // The beta window [3P/8, P/2] for k = 2 sits inside the segment after the last anchor used.
  std::vector<std::int64_t> used;
  for (auto a : anchors)
    if (a >= 10 && 4 * a <= 20000) used.push_back(a);
  if (used.size() < 3) throw Error("horizon-too-small", "need three anchors below the horizon cap");
  const std::size_t P = std::size_t(4 * used.back());
  auto m = c.pathological->materialize(P);
  auto M = multiply_by_factorials(m, 1.0);
  auto Pseq = multiply_by_factorials(m, 2.0);

  BoundFit f = table("pathological-properties", {"item", "value", "target", "ok"});
  auto row = [&](double item, double v, double target, bool ok) { f.rows.push_back({item, v, target, ok ? 1.0 : 0.0}); };

  bool lc = holds(predicate(m, "lc").verdict);
  row(0, lc, 1, lc);

  // (mg) sup of M at horizons 2 a_j for the last three anchors.
  double v[3];
  for (int i = 0; i < 3; ++i) {
    auto H = std::size_t(2 * used[used.size() - 3 + std::size_t(i)]);
    v[i] = std::log(predicate(M.truncated(H), "mg").value);
    row(1, v[i], double(H), true);
  }
  bool mg_div = trend_diverges(v[0], v[1], v[2]);
  f.rows.back()[3] = mg_div;

  PredicateOptions po;
  po.k = 2;
  auto b1 = predicate(M, "beta1", po);
  bool b1_ok = std::fabs(b1.value - 2.0) <= 0.05;
  row(2, b1.value, 2.0, b1_ok);

  // (beta2) witness: the expression equals 1 at p = a_j whenever k a_j <= a_{j+1}.
  const auto& L = m.log_terms();
  auto lmu = quotients(m).log_mu;
  bool b2_ok = true;
  std::size_t witnesses = 0;
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    auto a = std::size_t(anchors[j]);
    for (std::size_t k = 2; k <= j + 1 && k * a <= P; ++k) {
      double val = std::exp((L[k * a] - L[a]) / (double(a) * double(k - 1)) - lmu[k * a]);
      bool ok = val >= 1.0 - 1e-9;
      b2_ok = b2_ok && ok;
      ++witnesses;
      row(3, val, 1.0, ok);
    }
  }
  b2_ok = b2_ok && witnesses > 0;

  auto b1P = predicate(Pseq, "beta1", po);
  bool b1P_ok = holds(b1P.verdict) && std::fabs(b1P.value - 4.0) <= 0.05 * 4.0;
  row(4, b1P.value, 4.0, b1P_ok);

  f.constants = {{"horizon", P}, {"lc", lc}, {"mg_trend_diverges", mg_div}, {"beta1_tail_min", b1.value},
                 {"beta2_witnesses", witnesses}, {"beta1_of_p2_m", b1P.value}};
  f.stable = true;
  f.passed = lc && mg_div && b1_ok && b2_ok && b1P_ok;
  CheckOutcome o = from_fits({f});
  o.details = {{"beta2_proxy", predicate(m, "beta2").to_json()}};
  return o;
}

CheckOutcome run_h_omega(const CheckContext& c) {
  auto M = c.sequence->materialize(c.horizon);
  double top = M.log_term(M.horizon()) - M.log_term(M.horizon() - 1);
  BoundFit f = table("h-omega-identity", {"t", "h_eval", "h_direct", "relative_error"});
  double worst = 0;
  for (double t : log_grid(std::max(1e-3, std::exp(1.0 - top)), 10.0, 200)) {
    double a = h_eval(M, t), b = h_direct(M, t);
    double rel = std::fabs(a - b) / b;
    worst = std::max(worst, rel);
    f.rows.push_back({t, a, b, rel});
  }
  f.worst_margin = 1e-12 - worst;
  f.stable = true;
  f.passed = worst <= 1e-12;
  return from_fits({f});
}

Registry make_default() {
  Registry r;
  auto add = [&](std::string id, std::string anchor, Strategy s, CheckOutcome (*fn)(const CheckContext&)) {
    r.add({std::move(id), std::move(anchor), s, fn});
  };
  add("mg-across-levels", "W^l_{j+k} <= W^{2l}_j W^{2l}_k", Strategy::Exact, run_mg);
  add("absorption", "h^j W^l_j <= D W^{Al}_j with A = (L(L+1))^a", Strategy::Fitted, run_absorption);
  add("assoc-equiv", "x omega_{W^x}(t) <= omega(t) <= 2x omega_{W^x}(t) + C_x", Strategy::Fitted, run_assoc);
  add("hm-bounds", "exp(-omega^iota(t)) <= (h_{W^x}(t))^x", Strategy::Exact, run_hm);
  add("dynkin-a", "((omega_M)^a)^*(s) <= omega_{M/G^a}(a^a/s^a) <= ((omega_M)^a)^*(s/e)", Strategy::Tolerance,
      run_dynkin_a);
  add("dynkin-a1", "omega*_M(s) <= omega_m(1/s) <= omega*_M(s/e)", Strategy::Tolerance, run_dynkin_a1);
  add("conj-monotone", "tau <= A sigma + B implies tau*(s) <= A sigma*(s/A) + B", Strategy::Tolerance,
      run_conj_monotone);
  add("lc-minorant-identity", "N_p = sup_t t^p / exp((omega^iota_m)_star(t)) ~ p! m^lc_p", Strategy::Fitted,
      run_lc_minorant);
  add("concave-equiv", "omega_M(x) <= (omega^iota_m)_star(x) <= 1 + omega_M(ex), x >= mu_1", Strategy::Exact,
      run_concave_equiv);
  add("L-equiv", "omega_L ~ (omega^iota_m)_star with L_p = p! m^lc_p", Strategy::Fitted, run_L_equiv);
  add("Wx-Lx-equiv", "omega_{W^x} ~ omega_{L^x} with L^x_p = p! (w^x_p)^lc", Strategy::Fitted, run_Wx_Lx);
  add("snq-char", "(omega_snq) iff exists K > 1: limsup omega(Kt)/omega(t) < K", Strategy::Tolerance, run_snq);
  add("index-identities",
      "gamma(omega) > 0 iff (omega_1); (omega_snq) iff gamma > 1; gamma(omega) = gamma((omega*)^iota) + 1; "
      "gamma((tau^iota)_star) = gamma(tau) + 1; gamma(omega_M) = gamma(omega_m) + 1; gamma(omega_L) >= gamma(L)",
      Strategy::Tolerance, run_index);
  add("tau-matrix-equiv", "omega_{T^x} ~ tau ~ omega_{T^y}", Strategy::Fitted, run_tau_matrix);
  add("hat-matrix-equiv", "hat T {approx} Omega, hat T^x_p = p! T^x_p", Strategy::Fitted, run_hat_matrix);
  add("integrability", "int_0^1 -sigma^iota(ty) dt >= -C (sigma^iota(y) + 1), sigma = tau^{1/s}", Strategy::Fitted, run_integrability);
  add("poisson-tail", "int -sigma^iota(|t|)/(1+t^2) dt > -inf, sigma = tau^{1/s}", Strategy::Fitted, run_poisson);
  add("flat-sandwich", "K1^{-a} exp(-2a tau^iota(K2|xi|)) <= |G_a(xi)| <= exp(-(a/2) tau^iota(K3|xi|))",
      Strategy::Fitted, run_flat_sandwich);
  add("optimal-lower", "|G_a(xi)| >= K4 h_{T^x}(K2|xi|)", Strategy::Fitted, run_optimal_lower);
  add("kernel-integrability", "int_0^{t0} |e_a(t e^{i s})| / t dt <= t0", Strategy::Exact, run_kernel_integrability);
  add("kernel-decay", "|e_a(z)| <= C h_{T^{4/a}}(K/|z|)", Strategy::Fitted, run_kernel_decay);
  add("moment-sandwich", "C1 (K2/2)^p T_p^{1/(2a)} <= m_a(p) <= C2 K3^p T_p^{4/a}", Strategy::Fitted,
      run_moment_sandwich);
  add("remainder", "|f(z) - sum_{p<N} lambda_p z^p/p!| <= C (4hK3/K2)^N T^{8x}_N |z|^N", Strategy::Fitted,
      run_remainder);
  add("borel-rightinverse", "B(f_lambda) = lambda", Strategy::Tolerance, run_borel);
  add("pathological-properties", "(beta_2), (beta_1) and (mg) are violated; p!^2 m has (beta_1)", Strategy::Exact,
      run_pathological);
  add("h-omega-identity", "h_M(t) = exp(-omega_M(1/t))", Strategy::Exact, run_h_omega);
  return r;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char ch : s) o += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return o + "\"";
}

}  // namespace

// ---- results and runner ----

json CheckResult::to_json(bool meta) const {
  json fits = json::array();
  for (auto& f : outcome.fits) fits.push_back(f.to_json());
  json j = {{"id", id},         {"anchor", anchor},   {"strategy", to_string(strategy)},
            {"passed", passed}, {"stable", stable},   {"error", error},
            {"fits", fits},     {"details", outcome.details}, {"csv", id + ".csv"}};
  if (meta) j["seconds"] = seconds;
  return j;
}

std::string CheckResult::to_csv() const {
  std::vector<std::string> cols;
  for (auto& f : outcome.fits)
    for (auto& c : f.columns)
      if (std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
  std::ostringstream os;
  os << "part";
  for (auto& c : cols) os << "," << csv_field(c);
  os << "\n";
  for (auto& f : outcome.fits) {
    std::vector<int> at(cols.size(), -1);
    for (std::size_t i = 0; i < cols.size(); ++i)
      for (std::size_t k = 0; k < f.columns.size(); ++k)
        if (f.columns[k] == cols[i]) at[i] = int(k);
    for (auto& r : f.rows) {
      os << csv_field(f.id);
      for (int k : at) os << "," << (k >= 0 && std::size_t(k) < r.size() ? csv_number(r[std::size_t(k)]) : "");
      os << "\n";
    }
  }
  return os.str();
}

bool RunReport::exact_ok() const {
  return std::none_of(results.begin(), results.end(), [](auto& r) { return r.hard_failure(); });
}

bool RunReport::fitted_stable() const {
  return std::all_of(results.begin(), results.end(), [](auto& r) {
    return r.strategy != Strategy::Fitted || (r.stable && r.error.empty());
  });
}

json RunReport::summary(bool meta) const {
  json rows = json::array();
  double total = 0;
  for (auto& r : results) {
    json j = {{"id", r.id}, {"strategy", to_string(r.strategy)}, {"passed", r.passed}, {"stable", r.stable}};
    if (!r.error.empty()) j["error"] = r.error;
    if (meta) j["seconds"] = r.seconds;
    total += r.seconds;
    rows.push_back(j);
  }
  json s = {{"version", 1}, {"exact_ok", exact_ok()}, {"fitted_stable", fitted_stable()}, {"checks", rows}};
  if (meta) s["seconds"] = total;
  return s;
}

void RunReport::write_bundle(const std::string& dir, const CheckContext& ctx, bool meta) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw Error("io-error", "cannot write " + name);
    out << body;
  };
  json checks = json::array();
  for (auto& r : results) {
    checks.push_back(r.to_json(meta));
    write(r.id + ".csv", r.to_csv());
  }
  json index = {{"version", 1}, {"context", ctx.to_json()}, {"checks", checks}};
  write("index.json", index.dump(2) + "\n");
  write("summary.json", summary(meta).dump(2) + "\n");
  std::ostringstream txt;
  for (auto& r : results) {
    std::string verdict = r.passed ? "PASS" : (r.strategy == Strategy::Exact ? "FAIL" : "SOFT");
    txt << verdict << " " << r.id << " [" << to_string(r.strategy) << "]";
    if (r.strategy == Strategy::Fitted) txt << (r.stable ? " stable" : " unstable");
    if (!r.error.empty()) txt << " error=" << r.error;
    txt << "\n";
  }
  write("summary.txt", txt.str());
}

void Registry::add(CheckEntry e) {
  if (e.anchor.empty()) throw Error("unanchored-entry", e.id);
  for (auto& x : entries_)
    if (x.id == e.id) throw Error("duplicate-id", e.id);
  entries_.push_back(std::move(e));
}

const CheckEntry& Registry::find(const std::string& id) const {
  for (auto& e : entries_)
    if (e.id == id) return e;
  throw Error("unknown-id", id);
}

RunReport Registry::run(const std::vector<std::string>& ids, const CheckContext& ctx) const {
  std::vector<const CheckEntry*> sel;
  for (auto& id : ids) sel.push_back(&find(id));
  for (auto* e : sel)
    if (e->anchor.empty()) throw Error("unanchored-entry", e->id);
  CheckContext c = ctx;
  if (!c.cache) c.cache = std::make_shared<CheckCache>();
  RunReport rep;
  rep.results.resize(sel.size());
  parallel_for(sel.size(), [&](std::size_t i) {
    const CheckEntry& e = *sel[i];
    CheckResult& r = rep.results[i];
    r.id = e.id;
    r.anchor = e.anchor;
    r.strategy = e.strategy;
    auto t0 = std::chrono::steady_clock::now();
    try {
      r.outcome = e.run(c);
      r.passed = r.outcome.passed;
      r.stable = r.outcome.stable;
    } catch (const Error& ex) {
      r.error = ex.what();
    } catch (const std::exception& ex) {
      r.error = std::string("internal: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });
  return rep;
}

RunReport Registry::run_all(const CheckContext& ctx) const {
  std::vector<std::string> ids;
  for (auto& e : entries_) ids.push_back(e.id);
  return run(ids, ctx);
}

const Registry& default_registry() {
  static const Registry r = make_default();
  return r;
}

}  // namespace uh
