#include "ultraholo/indices.hpp"

#include <algorithm>
#include <cmath>

#include "ultraholo/conjugate.hpp"

namespace uh {

nlohmann::json IndexEstimate::to_json() const {
  auto num = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
    return v;
  };
  return {{"value", num(value)}, {"method", method}, {"horizon", horizon},
          {"stability", num(stability)}, {"extra", extra}};
}

namespace {

// max_{1 <= p < q <= P} (v_p - v_q) with v_p = log mu_p - gamma log p
double decline(const std::vector<double>& logmu, std::size_t P, double gamma) {
  double run = -kInf, d = 0.0;
  for (std::size_t q = 1; q <= P; ++q) {
    double v = logmu[q] - gamma * std::log(double(q));
    if (run > -kInf) d = std::max(d, run - v);
    run = std::max(run, v);
  }
  return d;
}

double gamma_seq_value(const std::vector<double>& logmu, std::size_t P, double a, double eta) {
  auto pass = [&](double g) {
    double full = decline(logmu, P, g), half = decline(logmu, P / 2, g);
    return full <= std::log(a) && full - half <= eta * std::log(2.0);
  };
  double lo = -8.0, hi = 8.0;
  if (pass(hi)) return kInf;
  if (!pass(lo)) return -kInf;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (pass(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

IndexEstimate gamma_seq(const WeightSequence& M, const GammaSeqOptions& opt) {
  if (M.horizon() < 16) throw Error("horizon-too-small", "gamma_seq needs P >= 16");
  auto lc = log_convex_minorant(M);
  auto logmu = quotients(lc).log_mu;
  const std::size_t P = lc.horizon();
  IndexEstimate e;
  e.method = "decline-growth(a=" + std::to_string(opt.a) + ",eta=" + std::to_string(opt.eta) + ")";
  e.horizon = double(P);
  e.value = gamma_seq_value(logmu, P, opt.a, opt.eta);
  double half = gamma_seq_value(logmu, P / 2, opt.a, opt.eta);
  e.stability = (std::isinf(e.value) || std::isinf(half)) ? (e.value == half ? 0.0 : kInf) : std::fabs(e.value - half);
  if (opt.sensitivity) {
    nlohmann::json s = nlohmann::json::array();
    for (double a : {2.0, 8.0}) s.push_back({{"a", a}, {"value", gamma_seq_value(logmu, P, a, opt.eta)}});
    e.extra = {{"sensitivity", s}, {"half_horizon_value", half}};
  }
  return e;
}

namespace {

double gamma_fn_value(const WeightFunction& w, double t_max, std::size_t n, double margin, double gmax) {
  auto grid = log_grid(1.0, t_max, n);
  std::vector<double> top, base;
  for (double t : grid)
    if (t >= t_max / 10) {
      top.push_back(t);
      base.push_back(w(t));
    }
  auto pass = [&](double g) {
    for (double K : {2.0, 4.0, 8.0, 16.0, 32.0}) {
      double f = std::pow(K, g), mx = 0;
      try {
        for (std::size_t i = 0; i < top.size(); ++i) mx = std::max(mx, w(f * top[i]) / base[i]);
      } catch (const Error&) {
        continue;  // beyond a finite horizon: this K cannot certify the bound
      }
      if (mx < K * (1 - margin)) return true;
    }
    return false;
  };
  if (pass(gmax)) return kInf;
  double lo = 0.0, hi = gmax;
  if (!pass(1e-9)) return 0.0;
  for (int it = 0; it < 40; ++it) {
    double mid = 0.5 * (lo + hi);
    (pass(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

IndexEstimate gamma_fn(const WeightFunction& w, const GammaFnOptions& opt) {
  IndexEstimate e;
  e.method = "limsup-ratio-scan";
  e.horizon = opt.t_max;
  double v = gamma_fn_value(w, opt.t_max, opt.n, opt.margin, opt.gamma_max);
  e.value = v;
  if (opt.horizon_check) {
    // Finite-horizon sources may not reach t_max^2; fall back to smaller extensions.
    double v2 = std::nan(""), t2 = 0;
    for (double e2 : {2.0, 1.75, 1.5}) {
      try {
        t2 = std::pow(opt.t_max, e2);
        v2 = gamma_fn_value(w, t2, opt.n, opt.margin, opt.gamma_max);
        break;
      } catch (const Error&) {
      }
    }
    if (std::isnan(v2)) {
      e.stability = kInf;
      e.extra = {{"note", "horizon check unavailable"}};
      return e;
    }
    e.extra = {{"value_at_extended_horizon", std::isinf(v2) ? nlohmann::json("+inf") : nlohmann::json(v2)},
               {"extended_horizon", t2}};
    // Log-type growth: the estimate keeps climbing with the horizon.
    if (std::isinf(v2) || (std::isfinite(v) && v2 > 1.5 * v + 0.5)) {
      e.value = kInf;
      e.stability = 0.0;
      e.extra["sentinel"] = "estimate grows with the horizon";
    } else {
      e.stability = std::fabs(v2 - v);
    }
  }
  return e;
}

bool IdentityReport::all_agree() const {
  return std::all_of(rows.begin(), rows.end(), [](auto& r) { return r.agrees; });
}

nlohmann::json IdentityReport::to_json() const {
  nlohmann::json a = nlohmann::json::array();
  auto num = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
    return v;
  };
  for (auto& r : rows)
    a.push_back({{"id", r.id}, {"lhs", num(r.lhs)}, {"rhs", num(r.rhs)}, {"tolerance", r.tolerance},
                 {"agrees", r.agrees}, {"note", r.note}});
  return a;
}

namespace {

IdentityRow equal_row(std::string id, const IndexEstimate& a, const IndexEstimate& b, double shift) {
  IdentityRow r;
  r.id = std::move(id);
  r.lhs = a.value;
  r.rhs = b.value + shift;
  r.tolerance = 0.1 + a.stability + b.stability;
  if (std::isinf(r.lhs) || std::isinf(r.rhs)) r.agrees = r.lhs == r.rhs;
  else r.agrees = std::fabs(r.lhs - r.rhs) <= r.tolerance;
  if (!r.agrees) r.note = "estimator-resolution finding";
  return r;
}

}  // namespace

IdentityReport check_index_identities(const WeightFunction& w) {
  IdentityReport rep;
  auto g = gamma_fn(w);
  auto d = diagnostics(w);
  {
    IdentityRow r{"gamma>0 iff omega1", g.value, d.omega1.holds ? 1.0 : 0.0, 0.0, false, ""};
    r.agrees = (g.value > 0) == d.omega1.holds;
    rep.rows.push_back(r);
  }
  {
    IdentityRow r{"snq iff gamma>1", g.value, d.snq.holds ? 1.0 : 0.0, 0.0, false, ""};
    // Within the estimator margin of 1 either verdict is accepted.
    r.agrees = std::fabs(g.value - 1.0) < 0.05 || (g.value > 1) == d.snq.holds;
    rep.rows.push_back(r);
  }
  try {
    auto g2 = gamma_fn(inversion(upper_star_of(w)));
    rep.rows.push_back(equal_row("gamma(omega) = gamma((omega*)^iota)+1", g, g2, 1.0));
  } catch (const Error& ex) {
    rep.rows.push_back({"gamma(omega) = gamma((omega*)^iota)+1", g.value, kInf, 0, false, ex.what()});
  }
  try {
    auto g3 = gamma_fn(lower_star_of(inversion(w)));
    rep.rows.push_back(equal_row("gamma((tau^iota)_star) = gamma(tau)+1", g3, g, 1.0));
  } catch (const Error& ex) {
    rep.rows.push_back({"gamma((tau^iota)_star) = gamma(tau)+1", kInf, g.value, 0, false, ex.what()});
  }
  return rep;
}

IdentityReport check_index_identities(const WeightSequence& M, SourcePtr m_src, SourcePtr M_src) {
  IdentityReport rep;
  auto gM = gamma_fn(from_sequence(M_src));
  auto gm = gamma_fn(from_sequence(m_src));
  rep.rows.push_back(equal_row("gamma(omega_M) = gamma(omega_m)+1", gM, gm, 1.0));
  auto gL = gamma_seq(M);
  {
    IdentityRow r{"gamma(omega_L) >= gamma(L)", gM.value, gL.value, 0.1 + gM.stability + gL.stability, false, ""};
    r.agrees = gM.value >= gL.value - r.tolerance;
    auto mg = predicate(M, "mg");
    if (holds(mg.verdict)) {
      r.agrees = r.agrees && std::fabs(gM.value - gL.value) <= r.tolerance;
      r.note = "(mg) holds, equality expected";
    }
    rep.rows.push_back(r);
  }
  auto gm_seq = gamma_seq(divide_by_factorials(M));
  rep.rows.push_back(equal_row("gamma(M) = gamma(m)+1", gL, gm_seq, 1.0));
  return rep;
}

}  // namespace uh
