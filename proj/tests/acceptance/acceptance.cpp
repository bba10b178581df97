// Acceptance suite: one PASS/FAIL line per criterion, with the measured figures and wall time.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ultraholo/checks.hpp"
#include "ultraholo/conjugate.hpp"
#include "ultraholo/extension.hpp"
#include "ultraholo/flatkernel.hpp"
#include "ultraholo/indices.hpp"
#include "ultraholo/sources.hpp"
#include "ultraholo/weightfn.hpp"
#include "ultraholo/weightseq.hpp"
#include "ultraholo/wmatrix.hpp"

using namespace uh;

namespace {

struct Verdict {
  bool ok = true;
  std::ostringstream msg;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      msg << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int n, const char* title, double budget_s, const std::function<void(Verdict&)>& body) {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.ok = false;
    v.msg << " [error: " << e.what() << "]";
  }
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.require(s < budget_s, "runtime over " + std::to_string(budget_s) + " s");
  if (!v.ok) ++failures;
  std::printf("%s C%-2d %s:%s (%.2f s / %.0f s)\n", v.ok ? "PASS" : "FAIL", n, title, v.msg.str().c_str(), s, budget_s);
  std::fflush(stdout);
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

// C1: same argmax and |value difference| < 1e-12 on 1000 random (sequence, t) pairs.
void c1(Verdict& v) {
  std::vector<WeightSequence> seqs = {gevrey(1.0, 2000), gevrey(2.0, 2000), pathological_source()->materialize(2000)};
  std::mt19937_64 rng(20261018);
  std::uniform_int_distribution<int> pick(0, 2);
  int argmax_miss = 0;
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto& M = seqs[std::size_t(pick(rng))];
    auto src = table_source(M);
    double top = quotients(M).log_mu.back();
    std::uniform_real_distribution<double> U(-2.0, top - 1e-6);
    double t = std::exp(U(rng));
    std::size_t brute_arg = 0;
    double brute = omega_M_bruteforce(M, t, &brute_arg);
    double fast = omega_M(*src, t);
    auto arg = std::size_t(src->index_for(std::log(t)));
    argmax_miss += arg != brute_arg;
    worst = std::max(worst, std::fabs(fast - brute));
  }
  v.msg << " argmax mismatches " << argmax_miss << ", max |diff| " << worst;
  v.require(argmax_miss == 0, "argmax");
  v.require(worst < 1e-12, "value diff");
}

// C2: omega*(s) = 1/(4s) on 100 log-spaced s, and the lower conjugate recovers omega on [1, 1e3].
void c2(Verdict& v) {
  auto w = power(0.5);
  double worst = 0;
  for (double s : log_grid(1e-3, 1e3, 100)) worst = std::max(worst, rel(upper_star(w, s, ConjMode::Numeric), 0.25 / s));
  auto h = [&](double s) { return upper_star(w, s, ConjMode::Numeric); };
  double worst2 = 0;
  for (double t : log_grid(1.0, 1e3, 40)) worst2 = std::max(worst2, std::fabs(lower_star(h, t) - w(t)) / w(t));
  v.msg << " max rel err omega* " << worst << ", biconjugate " << worst2;
  v.require(worst <= 1e-8, "omega*");
  v.require(worst2 <= 1e-6, "biconjugate");
}

// C3: no (mg)-across-levels violation for l in {1/2, 1, 2}, j + k <= 60.
void c3(Verdict& v) {
  for (auto& [name, w] : std::vector<std::pair<std::string, WeightFunction>>{
           {"power:0.5", power(0.5)}, {"gevrey:2", from_sequence(gevrey_source(2.0))}}) {
    WeightMatrix W(w);
    int viol = 0;
    for (double l : {0.5, 1.0, 2.0}) {
      auto f = check_mg_across_levels(W, l, 60);
      viol += f.constants.value("violations", 0);
      v.require(f.passed, name + " l=" + std::to_string(l));
    }
    v.msg << " " << name << " violations " << viol << ";";
  }
}

// C4: index estimators and the ramification law.
void c4(Verdict& v) {
  for (double a : {0.25, 0.5, 0.75}) {
    double g = gamma_fn(power(a)).value;
    v.msg << " g(t^" << a << ")=" << g;
    v.require(std::fabs(g - 1 / a) <= 0.05, "power " + std::to_string(a));
  }
  for (double s : {1.0, 2.0, 3.0}) {
    double gs = gamma_seq(gevrey(s, 1000)).value, gf = gamma_fn(from_sequence(gevrey_source(s))).value;
    v.msg << " g(G" << s << ")=" << gs << "/" << gf;
    v.require(std::fabs(gs - s) <= 0.05 && std::fabs(gf - s) <= 0.05, "gevrey " + std::to_string(s));
  }
  struct Case {
    std::string name;
    WeightFunction w;
    double s;
  };
  std::vector<Case> cases = {{"t^0.5", power(0.5), 0.5}, {"t^0.5", power(0.5), 2.0}, {"t^0.5", power(0.5), 3.0},
                             {"G1", from_sequence(gevrey_source(1.0)), 2.0},
                             {"G1", from_sequence(gevrey_source(1.0)), 3.0}};
  double worst = 0;
  for (auto& c : cases) {
    double d = std::fabs(gamma_fn(ramified(c.w, 1 / c.s)).value - c.s * gamma_fn(c.w).value);
    worst = std::max(worst, d);
    v.require(d <= 0.1, "ramification " + c.name + " s=" + std::to_string(c.s));
  }
  v.msg << "; ramification max dev " << worst;
}

std::vector<FlatFunctionModel> flat_models() {
  auto base = build_model(power(0.5), 1.0, 1.0);
  return {base.with_a(0.5), base, base.with_a(2.0)};
}

// C5: flat sandwich fits on 5 rays x 60 radii, stable, K2 and K3 within 2x across a.
void c5(Verdict& v) {
  std::vector<double> K2, K3;
  for (auto& m : flat_models()) {
    auto sw = verify_flat_sandwich(m);
    v.require(sw.fit.stable && sw.fit.passed, "a=" + std::to_string(m.a()));
    K2.push_back(sw.K2);
    K3.push_back(sw.K3);
    v.msg << " a=" << m.a() << ": K1=" << sw.K1 << " K2=" << sw.K2 << " K3=" << sw.K3 << ";";
  }
  auto spread = [](const std::vector<double>& x) {
    return *std::max_element(x.begin(), x.end()) / *std::min_element(x.begin(), x.end());
  };
  v.msg << " spread K2 " << spread(K2) << ", K3 " << spread(K3);
  v.require(spread(K2) < 2 && spread(K3) < 2, "constants vary by 2x or more");
}

// C6: moment sandwich for p <= 15 with stable C1, C2; refinement moves m_a(p) by < 1e-6.
void c6(Verdict& v) {
  double worst = 0;
  for (auto& m : flat_models()) {
    auto sw = verify_flat_sandwich(m);
    auto ms = verify_moment_sandwich(m, sw.K2, sw.K3, 15);
    v.require(ms.stable && ms.passed, "moment sandwich a=" + std::to_string(m.a()));
    v.msg << " a=" << m.a() << ": C1=" << ms.constants.value("C1", 0.0) << " C2=" << ms.constants.value("C2", 0.0) << ";";
    auto r = m.refined();
    for (std::size_t p = 0; p <= 15; ++p) worst = std::max(worst, rel(r.moment(p), m.moment(p)));
  }
  v.msg << " refinement max rel change " << worst;
  v.require(worst < 1e-6, "refinement");
}

ExtensionModel gevrey_extension(double h) {
  auto tau = from_sequence(gevrey_source(1.0));
  WeightMatrix T(tau);
  ExtensionOptions o;
  o.precision = 113;
  return build_extension(named_target("boundary", T, 1.0, h, o.p_max), tau, 0.5, o);
}

// C7: Borel right inverse for p <= 4 in binary128.
void c7(Verdict& v) {
  auto base = gevrey_extension(1.0);
  WeightMatrix T(base.flat().tau());
  for (std::string fam : {"delta0", "delta1", "boundary"}) {
    auto m = fam == "boundary" ? base : base.with_target(named_target(fam, T, 1.0, 1.0, base.p_max()));
    auto rep = borel_check(m, 4);
    double worst = 0;
    for (auto& r : rep.rows) worst = std::max(worst, std::abs(r.estimate - r.lambda) / r.tolerance);
    v.msg << " " << fam << " err/tol " << worst << ";";
    v.require(rep.passed, fam);
  }
}

// C8: remainder constants stable for N <= 8, k(h=2) <= 2.2 k(h=1).
void c8(Verdict& v) {
  double k[2];
  int i = 0;
  for (double h : {1.0, 2.0}) {
    auto f = remainder_check(gevrey_extension(h));
    k[i++] = f.constants.value("k", 0.0);
    v.msg << " h=" << h << ": C=" << f.constants.value("C", 0.0) << " k=" << k[i - 1] << (f.stable ? " stable;" : " unstable;");
    v.require(f.stable, "h=" + std::to_string(h));
  }
  v.msg << " ratio " << k[1] / k[0];
  v.require(k[1] <= 2.2 * k[0], "k ratio");
}

// C9: pathological fixture.
void c9(Verdict& v) {
  CheckContext ctx;
  auto rep = default_registry().run({"pathological-properties"}, ctx);
  const auto& r = rep.results.at(0);
  v.require(r.error.empty(), r.error);
  auto c = r.outcome.fits.at(0).constants;
  v.msg << " horizon " << c["horizon"] << ", lc " << c["lc"] << ", mg trend diverges " << c["mg_trend_diverges"]
        << ", beta1 tail-min " << c["beta1_tail_min"] << ", beta2 witnesses " << c["beta2_witnesses"]
        << ", beta1 ratio of p!^2 m " << c["beta1_of_p2_m"];
  v.require(c["lc"].get<bool>(), "lc");
  v.require(c["mg_trend_diverges"].get<bool>(), "mg trend");
  v.require(std::fabs(c["beta1_tail_min"].get<double>() - 2.0) <= 0.05, "beta1 tail-min");
  v.require(std::fabs(c["beta1_of_p2_m"].get<double>() - 4.0) <= 0.2, "beta1 of p!^2 m");
  v.require(r.passed, "registry verdict");
}

// C10: the full registry on the default context.
void c10(Verdict& v) {
  CheckContext ctx;
  auto rep = default_registry().run_all(ctx);
  int exact = 0, exact_ok = 0, fitted = 0, fitted_ok = 0;
  for (auto& r : rep.results) {
    if (r.strategy == Strategy::Exact) {
      ++exact;
      exact_ok += r.passed;
    } else {
      ++fitted;
      fitted_ok += r.passed && r.stable;
    }
    if (!(r.passed && r.stable)) v.msg << " " << r.id << (r.error.empty() ? "" : " (" + r.error + ")");
  }
  v.msg << " exact " << exact_ok << "/" << exact << ", fitted/tolerance stable " << fitted_ok << "/" << fitted;
  v.require(rep.exact_ok(), "exact checks");
  v.require(rep.fitted_stable(), "fitted stability");
}

}  // namespace

int main() {
  criterion(1, "omega_M binary search equals brute force", 5, c1);
  criterion(2, "Power(1/2) conjugates", 5, c2);
  criterion(3, "(mg) across levels", 10, c3);
  criterion(4, "index estimators", 30, c4);
  criterion(5, "flat sandwich", 60, c5);
  criterion(6, "moment sandwich", 60, c6);
  criterion(7, "Borel right inverse", 180, c7);
  criterion(8, "remainder constants", 120, c8);
  criterion(9, "pathological fixture", 10, c9);
  criterion(10, "verify --all on the default context", 600, c10);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures ? 1 : 0;
}
