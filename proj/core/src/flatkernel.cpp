#include "ultraholo/flatkernel.hpp"

#include <algorithm>
#include <cmath>

#include "flat_impl.hpp"
#include "ultraholo/parallel.hpp"
#include "ultraholo/wmatrix.hpp"

namespace uh {

std::complex<double> SectorPoint::to_halfplane() const {
  if (!(std::fabs(theta) < kPi / 2)) throw Error("outside-halfplane", "|theta| >= pi/2");
  return std::polar(r, theta);
}

namespace {

// least-squares slope of log tau against log t over [1e6, 1e8]
double measure_alpha(const WeightFunction& tau) {
  auto grid = log_grid(1e6, 1e8, 21);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double t : grid) {
    double v = tau(t);
    if (!(v > 0)) throw Error("tau-degenerate", "tau must be positive on [1e6, 1e8]");
    double x = std::log(t), y = std::log(v);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  double n = double(grid.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::shared_ptr<FlatRule> build_rule(const WeightFunction& tau, double s, double alpha, const FlatModelOptions& opt) {
  auto sigma = [&](double x) { return tau(std::exp(-x / s)); };
  double beta = alpha / s;
  if (!(beta < 1)) throw Error("tau-growth", "tau^iota ramified by s is not integrable at 0");
  double x_lo = -std::min(-opt.x_lo_limit, std::max(60.0, opt.tail_efolds / (1 - beta)));
  // stay inside the domain where tau can be evaluated (finite horizons)
  for (;;) {
    try {
      (void)sigma(x_lo);
      break;
    } catch (const Error&) {
      x_lo += 5;
      if (x_lo > -20) throw Error("tau-horizon", "tau cannot be evaluated far enough out");
    }
  }
  auto rule = std::make_shared<FlatRule>();
  rule->x_lo = x_lo;
  rule->x_hi = opt.x_hi;
  rule->width = opt.panel_width;

  std::vector<double> cuts;
  for (double x = x_lo; x < opt.x_hi; x += opt.panel_width) cuts.push_back(x);
  cuts.push_back(opt.x_hi);
  std::vector<double> kinks;
  tau.expr()->breakpoints(std::exp(-opt.x_hi / s), std::exp(-x_lo / s), kinks, opt.kink_cap);
  for (double u : kinks) {
    double x = -s * std::log(u);
    if (x > x_lo && x < opt.x_hi) cuts.push_back(x);
  }
  rule->kinks = kinks.size();
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return b - a < 1e-12; }), cuts.end());

  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double xa = cuts[k], xb = cuts[k + 1], L = xb - xa;
    unsigned n = unsigned(std::ceil(opt.nodes * L / opt.panel_width));
    n = std::clamp(n, 4u, opt.nodes);
    const auto& g = gauss_rule<quad>(n);
    for (unsigned i = 0; i < n; ++i) {
      quad x = quad(xa) + (g.x[i] + 1) * quad(L / 2);
      double sv = sigma(double(x));
      if (sv == 0) continue;
      quad t = exp(x);
      quad c = g.w[i] * quad(L / 2) * quad(sv) * t;
      rule->t2q.push_back(t * t);
      rule->cq.push_back(c);
    }
  }
  // int_0^{t_min} sigma ~ sigma(t_min) t_min / (1 - beta_loc) for a local power law
  double s0 = sigma(x_lo), s1 = sigma(x_lo + 0.5);
  double beta_loc = (s0 > 0 && s1 > 0) ? (std::log(s0) - std::log(s1)) / 0.5 : 0.0;
  if (!(beta_loc < 1)) throw Error("tau-growth", "sigma not integrable near 0");
  rule->tail_exponent = beta_loc;
  rule->A0q = quad(s0) * exp(quad(x_lo)) / quad(1 - beta_loc);
  rule->A0 = double(rule->A0q);
  rule->t2.reserve(rule->t2q.size());
  for (std::size_t i = 0; i < rule->t2q.size(); ++i) {
    rule->t2.push_back(double(rule->t2q[i]));
    rule->c.push_back(double(rule->cq[i]));
  }
  return rule;
}

std::size_t moment_grid_size(double h) { return std::size_t(std::llround((kMomentXHi - kMomentXLo) / h)) + 1; }

}  // namespace

FlatFunctionModel build_model(const WeightFunction& tau, double gamma, double a, const FlatModelOptions& opt) {
  if (!(gamma > 0)) throw Error("invalid-argument", "gamma must be > 0");
  if (!(a > 0)) throw Error("invalid-argument", "a must be > 0");
  FlatFunctionModel m;
  m.tau_ = tau;
  m.gamma_ = gamma;
  m.a_ = a;
  m.opt_ = opt;
  m.gamma_tau_ = gamma_fn(tau);
  double g = m.gamma_tau_.value;
  if (std::isinf(g) && g > 0) g = gamma + 2.0;
  if (!(g > gamma))
    throw Error("gamma-out-of-range", "gamma must be below the index estimate " + std::to_string(g));
  m.delta_ = 0.5 * (gamma + g);
  m.s_ = 0.5 * (1.0 / g + 1.0 / m.delta_);
  m.alpha_hat_ = measure_alpha(tau);
  m.rule_ = build_rule(tau, m.s_, m.alpha_hat_, opt);
  return m;
}

FlatFunctionModel FlatFunctionModel::with_a(double a) const {
  if (!(a > 0)) throw Error("invalid-argument", "a must be > 0");
  FlatFunctionModel m = *this;
  m.a_ = a;
  m.memo_ = std::make_shared<Memo>();
  return m;  // shares the rule and the axis exponents
}

FlatFunctionModel FlatFunctionModel::refined() const {
  FlatFunctionModel m = *this;
  m.opt_.panel_width /= 2;
  m.opt_.tail_efolds += 10;
  m.rule_ = build_rule(tau_, s_, alpha_hat_, m.opt_);
  m.moment_step_ = moment_step_ / 2;
  m.memo_ = std::make_shared<Memo>();
  m.grid_ = std::make_shared<GridMemo>();
  return m;
}

void FlatFunctionModel::check_sector(const SectorPoint& z) const {
  if (!(std::fabs(z.theta) < delta_ * kPi / 2)) throw Error("outside-sector", "|theta| >= delta pi/2");
  if (!(z.r > 0)) throw Error("invalid-argument", "modulus must be > 0");
}

std::complex<double> FlatFunctionModel::eval_F(std::complex<double> w) const {
  if (!(w.real() > 0)) throw Error("outside-halfplane", "Re w must be > 0");
  if (w.real() / std::abs(w) < 1e-6) throw Error("near-axis-instability", "Re w / |w| below 1e-6");
  auto e = flat_exponent_w<double>(*rule_, Cx<double>(w.real(), w.imag()));
  auto f = cx_exp(e * a_);
  return {f.re, f.im};
}

std::complex<double> FlatFunctionModel::eval_G(const SectorPoint& z) const {
  check_sector(z);
  auto f = cx_exp(flat_exponent<double>(*rule_, s_, z.r, z.theta) * a_);
  return {f.re, f.im};
}

double FlatFunctionModel::log_abs_G(const SectorPoint& z) const {
  check_sector(z);
  return a_ * flat_exponent<double>(*rule_, s_, z.r, z.theta).re;
}

std::complex<double> FlatFunctionModel::eval_kernel(const SectorPoint& z) const {
  return std::polar(z.r, z.theta) * eval_G(z.invert());
}

const std::vector<double>& FlatFunctionModel::moment_grid_exponent() const {
  std::call_once(grid_->once, [&] {
    grid_->exponent = axis_exponents<double>(*rule_, s_, kMomentXLo, moment_step_, moment_grid_size(moment_step_),
                                             &parallel_for);
  });
  return grid_->exponent;
}

double FlatFunctionModel::moment(std::size_t p) const {
  {
    std::lock_guard<std::mutex> lock(memo_->m);
    auto it = memo_->moments.find(p);
    if (it != memo_->moments.end()) return it->second;
  }
  double v = trapezoid_moment<double>(moment_grid_exponent(), a_, p, kMomentXLo, moment_step_, 1e-17);
  std::lock_guard<std::mutex> lock(memo_->m);
  memo_->moments.emplace(p, v);
  return v;
}

nlohmann::json FlatFunctionModel::to_json() const {
  return {{"tau", tau_.to_json()},
          {"gamma", gamma_},
          {"a", a_},
          {"delta", delta_},
          {"s", s_},
          {"gamma_tau", gamma_tau_.to_json()},
          {"alpha_hat", alpha_hat_},
          {"rule",
           {{"x_lo", rule_->x_lo},
            {"x_hi", rule_->x_hi},
            {"panel_width", rule_->width},
            {"nodes", rule_->t2.size()},
            {"kinks", rule_->kinks},
            {"tail_exponent", rule_->tail_exponent},
            {"tail_coefficient", rule_->A0}}},
          {"moment_step", moment_step_}};
}

// ---------------------------------------------------------------- fits

namespace {

struct Samples {
  std::vector<double> theta, r, lg;  // lg = log|G_1|
};

Samples sample_sector(const FlatFunctionModel& m, std::size_t rays, std::size_t radii, double r_lo, double r_hi) {
  Samples S;
  auto th = rays == 1 ? std::vector<double>{0.0} : lin_grid(-m.gamma() * kPi / 2, m.gamma() * kPi / 2, rays);
  auto rr = log_grid(r_lo, r_hi, radii);
  for (double t : th)
    for (double r : rr) {
      S.theta.push_back(t);
      S.r.push_back(r);
    }
  S.lg.resize(S.r.size());
  auto m1 = m.with_a(1.0);
  parallel_for(S.r.size(), [&](std::size_t i) { S.lg[i] = m1.log_abs_G({S.r[i], S.theta[i]}); });
  return S;
}

double tau_iota(const WeightFunction& tau, double y) { return tau(1.0 / y); }

// largest K with max(0, max_i(-2 tau^iota(K r_i) - lg_i)) <= budget
double fit_K2(const WeightFunction& tau, const Samples& S, double budget, double* logK1) {
  auto lk1 = [&](double logK) {
    double v = 0;
    for (std::size_t i = 0; i < S.r.size(); ++i)
      v = std::max(v, -2 * tau_iota(tau, std::exp(logK) * S.r[i]) - S.lg[i]);
    return v;
  };
  double lo = std::log(1e-12), hi = std::log(1e12);
  if (lk1(lo) > budget) {
    *logK1 = lk1(lo);
    return 0.0;
  }
  if (lk1(hi) <= budget) {
    *logK1 = lk1(hi);
    return kInf;
  }
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    (lk1(mid) <= budget ? lo : hi) = mid;
  }
  *logK1 = lk1(lo);
  return std::exp(lo);
}

// smallest K with lg_i <= -tau^iota(K r_i)/2 for all i
double fit_K3(const WeightFunction& tau, const Samples& S) {
  auto ok = [&](double logK) {
    for (std::size_t i = 0; i < S.r.size(); ++i)
      if (S.lg[i] > -0.5 * tau_iota(tau, std::exp(logK) * S.r[i]) + 1e-12) return false;
    return true;
  };
  double lo = std::log(1e-12), hi = std::log(1e12);
  if (ok(lo)) return std::exp(lo);
  if (!ok(hi)) return kInf;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return std::exp(hi);
}

}  // namespace

SandwichFit verify_flat_sandwich(const FlatFunctionModel& m, const SandwichOptions& opt) {
  SandwichFit out;
  const auto& tau = m.tau();
  const double a = m.a();
  auto S = sample_sector(m, opt.rays, opt.radii, opt.r_lo, opt.r_hi);
  auto S2 = sample_sector(m, opt.rays, 2 * opt.radii, opt.r_lo, opt.r_hi);
  double lk1, lk1b;
  out.K2 = fit_K2(tau, S, opt.k1_log_budget, &lk1);
  out.K1 = std::exp(lk1);
  out.K3 = fit_K3(tau, S);
  double K2b = fit_K2(tau, S2, opt.k1_log_budget, &lk1b), K3b = fit_K3(tau, S2);

  auto& f = out.fit;
  f.id = "flat-sandwich";
  f.columns = {"theta", "r", "lower_log", "log_abs_G", "upper_log", "margin"};
  double worst = kInf;
  bool finite = out.K2 > 0 && std::isfinite(out.K2) && std::isfinite(out.K3);
  for (std::size_t i = 0; i < S.r.size(); ++i) {
    double v = a * S.lg[i];
    double lower = finite ? -a * lk1 - 2 * a * tau_iota(tau, out.K2 * S.r[i]) : -kInf;
    double upper = finite ? -0.5 * a * tau_iota(tau, out.K3 * S.r[i]) : 0.0;
    double margin = std::min(v - lower, upper - v);
    worst = std::min(worst, margin);
    f.rows.push_back({S.theta[i], S.r[i], lower, v, upper, margin});
  }
  f.worst_margin = worst;
  f.stable = finite && stable_pair(out.K2, K2b) && stable_pair(out.K3, K3b) &&
             stable_pair(out.K1, std::exp(lk1b));
  f.passed = f.stable && worst >= -1e-9;
  f.constants = {{"K1", out.K1}, {"K2", out.K2}, {"K3", out.K3}, {"K1_doubled", std::exp(lk1b)},
                 {"K2_doubled", K2b}, {"K3_doubled", K3b}, {"a", a}, {"gamma", m.gamma()},
                 {"log_K1_budget", opt.k1_log_budget}};
  if (!f.stable) f.note = "constants moved by 2x or more under radii doubling";
  return out;
}

BoundFit verify_optimal_lower(const FlatFunctionModel& m, double K2, const SandwichOptions& opt) {
  BoundFit f;
  f.id = "optimal-lower";
  const double a = m.a(), x = 1.0 / (4 * a);
  if (!(K2 > 0) || !std::isfinite(K2)) {
    f.note = "no finite K2";
    return f;
  }
  WeightMatrix T(m.tau());
  auto L = T.level_covering(x, 1.0 / (K2 * opt.r_lo));
  auto fit = [&](const Samples& S, std::vector<std::vector<double>>* rows) {
    double lk4 = kInf;
    for (std::size_t i = 0; i < S.r.size(); ++i) {
      double lh = -omega_M(L, 1.0 / (K2 * S.r[i]));
      double v = a * S.lg[i];
      lk4 = std::min(lk4, v - lh);
      if (rows) rows->push_back({S.theta[i], S.r[i], lh, v});
    }
    return lk4;
  };
  std::vector<std::vector<double>> rows;
  double lk4 = fit(sample_sector(m, opt.rays, opt.radii, opt.r_lo, opt.r_hi), &rows);
  double lk4b = fit(sample_sector(m, opt.rays, 2 * opt.radii, opt.r_lo, opt.r_hi), nullptr);
  f.columns = {"theta", "r", "log_h", "log_abs_G", "margin"};
  double worst = kInf;
  for (auto& r : rows) {
    double margin = r[3] - (lk4 + r[2]);
    worst = std::min(worst, margin);
    r.push_back(margin);
  }
  f.rows = std::move(rows);
  f.worst_margin = worst;
  f.constants = {{"K4", std::exp(lk4)}, {"K4_doubled", std::exp(lk4b)}, {"K2", K2}, {"x", x},
                 {"level_horizon", L.horizon()}};
  f.stable = std::isfinite(lk4) && stable_pair(std::exp(lk4), std::exp(lk4b));
  f.passed = f.stable;
  return f;
}

BoundFit verify_moment_sandwich(const FlatFunctionModel& m, double K2, double K3, std::size_t p_max) {
  BoundFit f;
  f.id = "moment-sandwich";
  const double a = m.a();
  WeightMatrix T(m.tau());
  std::size_t P = std::max<std::size_t>(p_max, 2);
  auto lo = T.level(1.0 / (2 * a), P), hi = T.level(4.0 / a, P);
  auto ref = m.refined();
  std::vector<double> lm(p_max + 1);
  double worst_refine = 0;
  for (std::size_t p = 0; p <= p_max; ++p) {
    double v = m.moment(p), vr = ref.moment(p);
    if (!(v > 0)) throw Error("moment-nonpositive", "m_a(" + std::to_string(p) + ") <= 0");
    worst_refine = std::max(worst_refine, std::fabs(v - vr) / vr);
    lm[p] = std::log(v);
  }
  auto constants = [&](std::size_t pm, double* lc1, double* lc2) {
    *lc1 = kInf;
    *lc2 = -kInf;
    for (std::size_t p = 0; p <= pm; ++p) {
      *lc1 = std::min(*lc1, lm[p] - double(p) * std::log(K2 / 2) - lo.log_term(p));
      *lc2 = std::max(*lc2, lm[p] - double(p) * std::log(K3) - hi.log_term(p));
    }
  };
  double c1, c2, c1h, c2h;
  constants(p_max, &c1, &c2);
  constants(p_max / 2, &c1h, &c2h);
  f.columns = {"p", "lower_log", "log_moment", "upper_log", "refined_rel_change"};
  double worst = kInf;
  for (std::size_t p = 0; p <= p_max; ++p) {
    double l = c1 + double(p) * std::log(K2 / 2) + lo.log_term(p);
    double u = c2 + double(p) * std::log(K3) + hi.log_term(p);
    worst = std::min({worst, lm[p] - l, u - lm[p]});
    f.rows.push_back({double(p), l, lm[p], u, std::fabs(std::exp(lm[p]) - ref.moment(p)) / ref.moment(p)});
  }
  f.worst_margin = worst;
  f.constants = {{"C1", std::exp(c1)}, {"C2", std::exp(c2)}, {"C1_half", std::exp(c1h)},
                 {"C2_half", std::exp(c2h)}, {"K2", K2}, {"K3", K3}, {"a", a}, {"p_max", p_max},
                 {"refinement_max_rel_change", worst_refine}};
  f.stable = stable_pair(std::exp(c1), std::exp(c1h)) && stable_pair(std::exp(c2), std::exp(c2h));
  f.passed = f.stable && worst_refine < 1e-6;
  if (worst_refine >= 1e-6) f.note = "moment refinement changed values by more than 1e-6";
  return f;
}

BoundFit verify_kernel_integrability(const FlatFunctionModel& m) {
  BoundFit f;
  f.id = "kernel-integrability";
  f.columns = {"sigma", "t0", "integral", "margin_log"};
  const auto& g = gauss_rule<double>(16);
  auto rays = lin_grid(-0.999 * m.gamma() * kPi / 2, 0.999 * m.gamma() * kPi / 2, 5);
  double worst = kInf;
  for (double sg : rays)
    for (double t0 : {1e-2, 1.0, 1e2}) {
      // t = t0 e^{-y}: int_0^{t0} |G(e^{-i sg}/t)| dt
      double sum = 0;
      for (double y0 = 0; y0 < 80; y0 += 0.5)
        for (unsigned i = 0; i < 16; ++i) {
          double y = y0 + 0.25 * (g.x[i] + 1), t = t0 * std::exp(-y);
          sum += 0.25 * g.w[i] * t * std::exp(m.log_abs_G({1.0 / t, -sg}));
        }
      sum += t0 * std::exp(-80.0);
      double margin = std::log(t0) - std::log(sum);
      worst = std::min(worst, margin);
      f.rows.push_back({sg, t0, sum, margin});
    }
  f.worst_margin = worst;
  f.stable = true;
  f.passed = worst >= -1e-9;
  f.constants = {{"rays", rays.size()}};
  return f;
}

BoundFit verify_kernel_decay(const FlatFunctionModel& m, const SandwichOptions& opt) {
  BoundFit f;
  f.id = "kernel-decay";
  const double a = m.a(), x = 4.0 / a;
  WeightMatrix T(m.tau());
  auto sample = [&](std::size_t n) {
    auto S = sample_sector(m.with_a(1.0), opt.rays, n, opt.r_lo, opt.r_hi);
    // reuse S.r as |z|; log|e_a(z)| = log|z| + a log|G_1(1/z)|
    std::vector<double> le(S.r.size());
    parallel_for(S.r.size(), [&](std::size_t i) {
      le[i] = std::log(S.r[i]) + a * m.with_a(1.0).log_abs_G({1.0 / S.r[i], -S.theta[i]});
    });
    return std::make_pair(S, le);
  };
  auto [S, le] = sample(opt.radii);
  auto [S2, le2] = sample(2 * opt.radii);
  // Smallest K on 2^j whose C stays within e of the trivial bound sup|e_a| and is stable.
  double sup = -kInf;
  for (double v : le) sup = std::max(sup, v);
  double chosen = 0, lc = kInf, lc2 = kInf;
  for (int j = -10; j <= 30 && chosen == 0; ++j) {
    double K = std::ldexp(1.0, j);
    auto L = T.level_covering(x, std::max(1.0, opt.r_hi / K));
    auto logC = [&](const Samples& s, const std::vector<double>& e) {
      double v = -kInf;
      for (std::size_t i = 0; i < s.r.size(); ++i) v = std::max(v, e[i] + omega_M(L, s.r[i] / K));
      return v;
    };
    double c, c2;
    try {
      c = logC(S, le);
      c2 = logC(S2, le2);
    } catch (const Error& e) {
      if (e.code() != "horizon-exhausted") throw;
      continue;  // the level cannot reach r_hi / K at the capped horizon
    }
    if (std::isfinite(c) && c <= sup + 1.0 && stable_pair(std::exp(c), std::exp(c2))) {
      chosen = K;
      lc = c;
      lc2 = c2;
      f.columns = {"theta", "abs_z", "log_abs_kernel", "upper_log", "margin"};
      double worst = kInf;
      for (std::size_t i = 0; i < S.r.size(); ++i) {
        double u = c - omega_M(L, S.r[i] / K);
        worst = std::min(worst, u - le[i]);
        f.rows.push_back({S.theta[i], S.r[i], le[i], u, u - le[i]});
      }
      f.worst_margin = worst;
    }
  }
  f.stable = chosen > 0;
  f.passed = f.stable;
  f.constants = {{"K", chosen}, {"C", std::exp(lc)}, {"C_doubled", std::exp(lc2)}, {"x", x}};
  if (!f.stable) f.note = "no K on the grid 2^-10..2^30 gives a stable C";
  return f;
}

BoundFit verify_integrability(const WeightFunction& tau) {
  BoundFit f;
  f.id = "integrability";
  auto run = [&](std::size_t n, std::vector<std::vector<double>>* rows) {
    double c = 0;
    for (double y : log_grid(1e-3, 1e3, n)) {
      double lhs = kappa(tau, 1.0 / y), base = tau(1.0 / y) + 1.0;
      c = std::max(c, lhs / base);
      if (rows) rows->push_back({y, lhs, base});
    }
    return c;
  };
  std::vector<std::vector<double>> rows;
  double C = run(61, &rows), Ch = run(31, nullptr);
  f.columns = {"y", "integral", "tau_iota_plus_1", "margin"};
  double worst = kInf;
  for (auto& r : rows) {
    double margin = C * r[2] - r[1];
    worst = std::min(worst, margin);
    r.push_back(margin);
  }
  f.rows = std::move(rows);
  f.worst_margin = worst;
  f.constants = {{"C", C}, {"C_half_samples", Ch}};
  f.stable = std::isfinite(C) && stable_pair(C, Ch);
  f.passed = f.stable;
  return f;
}

BoundFit verify_poisson_tail(const WeightFunction& tau) {
  BoundFit f;
  f.id = "poisson-tail";
  f.columns = {"log_cutoff", "integral"};
  const auto& g = gauss_rule<double>(16);
  // int_{x_lo}^{60} tau(e^{-x}) e^x / (1 + e^{2x}) dx, accumulated panel by panel downward
  double sum = 0, x = 60.0;
  std::vector<double> vals;
  for (double cut : {-5.0, -10.0, -20.0, -40.0, -80.0}) {
    bool ok = true;
    for (; x > cut + 1e-12 && ok; x -= 0.5) {
      double part = 0;
      try {
        for (unsigned i = 0; i < 16; ++i) {
          double u = x - 0.25 * (g.x[i] + 1);
          part += 0.25 * g.w[i] * tau(std::exp(-u)) * std::exp(u) / (1 + std::exp(2 * u));
        }
      } catch (const Error&) {
        ok = false;
        break;
      }
      sum += part;
    }
    if (!ok) break;
    vals.push_back(sum);
    f.rows.push_back({cut, sum});
  }
  bool converges = vals.size() >= 3;
  if (converges) {
    double d1 = vals[vals.size() - 2] - vals[vals.size() - 3], d2 = vals.back() - vals[vals.size() - 2];
    // Cutoff intervals double in length, so shrinking increments mean geometric decay.
    converges = std::isfinite(vals.back()) && d2 < d1;
    double r = d1 > 0 ? d2 / d1 : 0.0;
    double limit = converges ? vals.back() + d2 * r / (1 - r) : kInf;
    f.constants = {{"integral", vals.back()}, {"extrapolated_integral", limit}, {"last_increment", d2},
                   {"previous_increment", d1}};
  }
  f.stable = converges;
  f.passed = converges;
  f.worst_margin = converges ? 0.0 : -kInf;
  if (!converges) f.note = "increments do not shrink as the cutoff goes to 0";
  return f;
}

}  // namespace uh
