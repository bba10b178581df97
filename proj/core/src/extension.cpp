#include "ultraholo/extension.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>

#include "flat_impl.hpp"
#include "ultraholo/parallel.hpp"

namespace uh {

// ---------------------------------------------------------------- targets

nlohmann::json TargetSequence::to_json() const {
  nlohmann::json l = nlohmann::json::array();
  for (auto& v : lambda) l.push_back({v.real(), v.imag()});
  return {{"lambda", l}, {"x", x}, {"h", h}, {"norm", norm}, {"family", family}};
}

TargetSequence TargetSequence::from_json(const nlohmann::json& j) {
  TargetSequence t;
  for (auto& v : j.at("lambda")) {
    if (v.is_array()) t.lambda.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    else t.lambda.emplace_back(v.get<double>(), 0.0);
  }
  t.x = j.value("x", 1.0);
  t.h = j.value("h", 1.0);
  t.norm = j.value("norm", 1.0);
  t.family = j.value("family", std::string("file"));
  return t;
}

namespace {

double log_envelope(const WeightSequence& Tx, double h, std::size_t p) {
  return double(p) * std::log(h) + log_factorial(double(p)) + Tx.log_term(p);
}

WeightSequence class_level(const WeightMatrix& T, double x, std::size_t p_max) {
  return T.level(x, std::max<std::size_t>(p_max, 2));
}

}  // namespace

double class_norm(const std::vector<std::complex<double>>& lambda, const WeightSequence& Tx, double h) {
  double n = 0;
  for (std::size_t p = 0; p < lambda.size(); ++p)
    n = std::max(n, std::abs(lambda[p]) / std::exp(log_envelope(Tx, h, p)));
  return n;
}

void validate_class(const TargetSequence& t, const WeightMatrix& T) {
  if (t.lambda.empty()) throw Error("invalid-argument", "empty target sequence");
  auto Tx = class_level(T, t.x, t.lambda.size() - 1);
  for (std::size_t p = 0; p < t.lambda.size(); ++p) {
    double bound = t.norm * std::exp(log_envelope(Tx, t.h, p));
    if (std::abs(t.lambda[p]) > bound * (1 + 1e-12))
      throw Error("class-violation", "|lambda_" + std::to_string(p) + "| exceeds the claimed norm bound");
  }
}

TargetSequence boundary_sequence(const WeightMatrix& T, double x, double h, std::size_t p_max) {
  auto Tx = class_level(T, x, p_max);
  TargetSequence t;
  t.x = x;
  t.h = h;
  t.family = "boundary";
  for (std::size_t p = 0; p <= p_max; ++p) t.lambda.emplace_back(std::exp(log_envelope(Tx, h, p)), 0.0);
  t.norm = 1.0;
  return t;
}

TargetSequence delta_sequence(const WeightMatrix& T, double x, double h, std::size_t k, std::size_t p_max,
                              bool class_scaled, double c) {
  if (k > p_max) throw Error("invalid-argument", "delta index beyond p_max");
  auto Tx = class_level(T, x, p_max);
  TargetSequence t;
  t.x = x;
  t.h = h;
  t.family = "delta" + std::to_string(k);
  t.lambda.assign(p_max + 1, {0.0, 0.0});
  double env = std::exp(log_envelope(Tx, h, k));
  t.lambda[k] = class_scaled ? env : c;
  t.norm = std::abs(t.lambda[k]) / env;
  return t;
}

TargetSequence random_class_member(const WeightMatrix& T, double x, double h, std::size_t p_max,
                                   std::uint64_t seed) {
  auto Tx = class_level(T, x, p_max);
  std::mt19937_64 gen(seed);
  auto unit = [&] { return double(gen() >> 11) * 0x1.0p-53; };
  TargetSequence t;
  t.x = x;
  t.h = h;
  t.family = "random";
  for (std::size_t p = 0; p <= p_max; ++p) {
    double rad = std::sqrt(unit()), ang = 2 * kPi * unit();
    t.lambda.push_back(std::polar(rad, ang) * std::exp(log_envelope(Tx, h, p)));
  }
  t.norm = 1.0;
  return t;
}

TargetSequence named_target(const std::string& family, const WeightMatrix& T, double x, double h,
                            std::size_t p_max, std::uint64_t seed) {
  if (family == "delta0") return delta_sequence(T, x, h, 0, p_max);
  if (family == "delta1") return delta_sequence(T, x, h, 1, p_max);
  if (family == "boundary") return boundary_sequence(T, x, h, p_max);
  if (family == "random") return random_class_member(T, x, h, p_max, seed);
  throw Error("unknown-family", "target family '" + family + "'");
}

// ---------------------------------------------------------------- model

namespace {

using Phi = std::vector<Cx<quad>>;  // Phi_p(V) for p = 0..P

struct RayCache {
  std::mutex m;
  std::map<std::pair<double, double>, Phi> values;  // (theta, r) -> Phi(R0/r)
};

}  // namespace

struct ExtensionImpl {
  TargetSequence target;
  WeightFunction tau;
  double gamma = 0;
  FlatFunctionModel flat;
  SandwichFit sandwich;
  double R0 = 0, K2hat = 0, C1 = 0;
  int precision = 113;
  std::size_t P = 24;
  double k2_fraction = 0.5;
  std::vector<quad> mom;
  std::vector<Cx<quad>> lam, b;
  std::vector<double> log_env;  // log h^p p! T^x_p
  std::shared_ptr<RayCache> cache = std::make_shared<RayCache>();
};

namespace {

template <class R>
std::vector<R> moments_in(const FlatFunctionModel& flat, std::size_t P) {
  const double h = FlatFunctionModel::kMomentStep;
  std::size_t n = std::size_t(std::llround((kMomentXHi - kMomentXLo) / h)) + 1;
  auto e = axis_exponents<R>(*flat.rule(), flat.s(), kMomentXLo, h, n, &parallel_for);
  std::vector<R> m(P + 1);
  for (std::size_t p = 0; p <= P; ++p) m[p] = trapezoid_moment<R>(e, flat.a(), p, kMomentXLo, h, 1e-36);
  return m;
}

void assemble_coefficients(ExtensionImpl& X) {
  auto& t = X.target;
  if (t.lambda.size() > X.P + 1) throw Error("invalid-argument", "target longer than p_max + 1");
  X.lam.assign(X.P + 1, Cx<quad>());
  for (std::size_t p = 0; p < t.lambda.size(); ++p) X.lam[p] = Cx<quad>(t.lambda[p].real(), t.lambda[p].imag());
  X.b.resize(X.P + 1);
  quad fact = 1;
  for (std::size_t p = 0; p <= X.P; ++p) {
    if (p > 0) fact *= quad(double(p));
    X.b[p] = X.lam[p] * quad(1 / (fact * X.mom[p]));
    double env = t.norm / X.C1 * std::pow(2 * t.h / X.K2hat, double(p));
    if (double(cx_abs(X.b[p])) > env * (1 + 1e-9))
      throw Error("coefficient-bound", "|b_" + std::to_string(p) + "| exceeds (|lambda|/C1)(2h/K2)^p");
  }
}

// Phi_p(R0/r) along the ray theta for each r, with Phi_p(V) = int_0^V G(e^{i theta}/v) v^p dv.
template <class R>
std::vector<std::vector<Cx<R>>> ray_phi(const ExtensionImpl& X, double theta, const std::vector<double>& radii) {
  using std::exp;
  using std::log;
  const FlatRule& rule = *X.flat.rule();
  const double s = X.flat.s(), a = X.flat.a();
  const std::size_t P = X.P;
  const double u_min = -40.0;
  // upper end: where G(e^{i theta}/v) v^{P+1} has dropped far below its peak
  double u_end = 0, qmax = -kInf;
  for (double u = 0; u <= 200; u += 0.5) {
    double lg = a * flat_exponent<double>(rule, s, std::exp(-u), theta).re;
    double q = lg + double(P + 1) * u;
    qmax = std::max(qmax, q);
    u_end = u;
    if (q < qmax - 100) break;
  }
  std::vector<double> cuts;
  for (double u = u_min; u < u_end; u += 0.5) cuts.push_back(u);
  cuts.push_back(u_end);
  std::vector<double> uk(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    uk[k] = std::log(X.R0 / radii[k]);
    if (uk[k] > u_min && uk[k] < u_end) cuts.push_back(uk[k]);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  constexpr unsigned N = 20;
  const auto& g = gauss_rule<R>(N);
  const std::size_t panels = cuts.size() - 1;
  std::vector<Cx<R>> H(panels * N);
  std::vector<R> U(panels * N), W(panels * N);
  for (std::size_t k = 0; k < panels; ++k) {
    R ua = R(cuts[k]), L = R(cuts[k + 1] - cuts[k]);
    for (unsigned i = 0; i < N; ++i) {
      U[k * N + i] = ua + (g.x[i] + 1) * L / 2;
      W[k * N + i] = g.w[i] * L / 2;
    }
  }
  parallel_for(H.size(), [&](std::size_t i) {
    H[i] = cx_exp(flat_exponent<R>(rule, s, R(exp(-U[i])), R(theta)) * R(a));
  });

  std::vector<Cx<R>> cum(P + 1);
  R vmin = exp(R(u_min));
  {
    R vp = vmin;
    for (std::size_t p = 0; p <= P; ++p, vp *= vmin) cum[p] = Cx<R>(vp / R(double(p + 1)));
  }
  std::multimap<double, std::size_t> at;
  for (std::size_t k = 0; k < radii.size(); ++k) at.emplace(uk[k], k);
  std::vector<std::vector<Cx<R>>> out(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k)
    if (uk[k] <= u_min) {
      out[k].resize(P + 1);
      R V = exp(R(uk[k])), vp = V;
      for (std::size_t p = 0; p <= P; ++p, vp *= V) out[k][p] = Cx<R>(vp / R(double(p + 1)));
    }
  for (std::size_t k = 0; k < panels; ++k) {
    for (unsigned i = 0; i < N; ++i) {
      std::size_t j = k * N + i;
      R v = exp(U[j]);
      Cx<R> term = H[j] * (W[j] * v);
      for (std::size_t p = 0; p <= P; ++p) {
        cum[p] += term;
        term = term * v;
      }
    }
    auto range = at.equal_range(cuts[k + 1]);
    for (auto it = range.first; it != range.second; ++it) out[it->second] = cum;
  }
  for (std::size_t k = 0; k < radii.size(); ++k)
    if (uk[k] >= u_end) out[k] = cum;
  return out;
}

template <class R> R to_r(const quad& q);
template <> double to_r<double>(const quad& q) { return double(q); }
template <> quad to_r<quad>(const quad& q) { return q; }

// f(r e^{i theta}) = e^{-i theta} sum_p b_p r^p Phi_p(R0/r); the Phi cache is shared across targets.
template <class R>
std::vector<Cx<R>> ray_f(const ExtensionImpl& X, double theta, const std::vector<double>& radii) {
  std::vector<double> missing;
  {
    std::lock_guard<std::mutex> lock(X.cache->m);
    for (double r : radii)
      if (!X.cache->values.count({theta, r})) missing.push_back(r);
  }
  if (!missing.empty()) {
    auto phi = ray_phi<R>(X, theta, missing);
    std::lock_guard<std::mutex> lock(X.cache->m);
    for (std::size_t k = 0; k < missing.size(); ++k) {
      Phi v(phi[k].size());
      for (std::size_t p = 0; p < v.size(); ++p) v[p] = Cx<quad>(quad(phi[k][p].re), quad(phi[k][p].im));
      X.cache->values[{theta, missing[k]}] = std::move(v);
    }
  }
  std::vector<Cx<R>> f(radii.size());
  Cx<R> rot = cx_polar<R>(R(1), R(-theta));
  for (std::size_t k = 0; k < radii.size(); ++k) {
    Phi phi;
    {
      std::lock_guard<std::mutex> lock(X.cache->m);
      phi = X.cache->values.at({theta, radii[k]});
    }
    Cx<R> acc;
    R rp = 1;
    for (std::size_t p = 0; p <= X.P; ++p, rp *= R(radii[k])) {
      Cx<R> b(to_r<R>(X.b[p].re), to_r<R>(X.b[p].im));
      Cx<R> ph(to_r<R>(phi[p].re), to_r<R>(phi[p].im));
      acc += b * ph * rp;
    }
    f[k] = rot * acc;
  }
  return f;
}

void check_precision(int bits) {
  if (bits < 53) throw Error("unsupported-precision", "precision below 53 bits");
  if (bits > 113) throw Error("unsupported-precision", "precision above 113 bits (binary128) is not available");
}

}  // namespace

ExtensionModel build_extension(const TargetSequence& lambda, const WeightFunction& tau, double gamma,
                               const ExtensionOptions& opt) {
  check_precision(opt.precision);
  if (!(lambda.x > 0) || !(lambda.h > 0)) throw Error("invalid-argument", "x and h must be > 0");
  WeightMatrix T(tau);
  validate_class(lambda, T);
  auto X = std::make_shared<ExtensionImpl>();
  X->target = lambda;
  X->tau = tau;
  X->gamma = gamma;
  X->P = opt.p_max;
  X->precision = opt.precision;
  X->k2_fraction = opt.k2_fraction;
  X->flat = build_model(tau, gamma, 1.0 / (2 * lambda.x));
  X->sandwich = verify_flat_sandwich(X->flat, opt.sandwich);
  if (!X->sandwich.fit.stable) throw Error("unstable-fit", "flat sandwich fit is not stable; K2 unavailable");
  X->K2hat = opt.k2_fraction * X->sandwich.K2;
  X->R0 = X->K2hat / (4 * lambda.h);
  if (opt.precision == 53) {
    auto m = moments_in<double>(X->flat, X->P);
    for (double v : m) X->mom.push_back(quad(v));
  } else {
    X->mom = moments_in<quad>(X->flat, X->P);
  }
  auto Tx = class_level(T, lambda.x, X->P);
  X->C1 = kInf;
  for (std::size_t p = 0; p <= X->P; ++p) {
    X->log_env.push_back(log_envelope(Tx, lambda.h, p));
    double lm = double(log(X->mom[p]));
    X->C1 = std::min(X->C1, std::exp(lm - double(p) * std::log(X->K2hat / 2) - Tx.log_term(p)));
  }
  assemble_coefficients(*X);
  ExtensionModel m;
  m.impl = X;
  return m;
}

ExtensionModel ExtensionModel::with_target(const TargetSequence& t) const {
  if (t.x != impl->target.x || t.h != impl->target.h)
    throw Error("invalid-argument", "with_target needs the same (x, h)");
  validate_class(t, WeightMatrix(impl->tau));
  auto X = std::make_shared<ExtensionImpl>(*impl);  // shares the ray cache
  X->target = t;
  assemble_coefficients(*X);
  ExtensionModel m;
  m.impl = X;
  return m;
}

const TargetSequence& ExtensionModel::target() const { return impl->target; }
const FlatFunctionModel& ExtensionModel::flat() const { return impl->flat; }
double ExtensionModel::R0() const { return impl->R0; }
double ExtensionModel::K2_hat() const { return impl->K2hat; }
double ExtensionModel::K2_fit() const { return impl->sandwich.K2; }
double ExtensionModel::C1() const { return impl->C1; }
int ExtensionModel::precision() const { return impl->precision; }
std::size_t ExtensionModel::p_max() const { return impl->P; }

std::vector<std::complex<double>> ExtensionModel::borel_coeffs() const {
  std::vector<std::complex<double>> out;
  for (auto& b : impl->b) out.emplace_back(double(b.re), double(b.im));
  return out;
}

std::vector<double> ExtensionModel::moments() const {
  std::vector<double> out;
  for (auto& m : impl->mom) out.push_back(double(m));
  return out;
}

std::complex<double> ExtensionModel::eval_g(double u, double tol) const {
  if (!(u >= 0) || u > impl->R0 * (1 + 1e-12)) throw Error("invalid-argument", "u must lie in [0, R0]");
  const auto& X = *impl;
  double q = 2 * X.target.h * u / X.K2hat;
  double env = X.target.norm / X.C1;
  double tail = env * std::pow(q, double(X.P + 1)) / (1 - q);
  if (tail > tol * env) throw Error("tail-too-large", "geometric tail bound exceeds tolerance at u");
  Cx<quad> acc;
  quad up = 1;
  for (std::size_t p = 0; p <= X.P; ++p, up *= quad(u)) acc += X.b[p] * up;
  return {double(acc.re), double(acc.im)};
}

std::vector<std::complex<double>> ExtensionModel::eval_ray(double theta, const std::vector<double>& radii) const {
  if (!(std::fabs(theta) < impl->gamma * kPi / 2)) throw Error("outside-sector", "|theta| >= gamma pi/2");
  std::vector<std::complex<double>> out;
  if (impl->precision == 53) {
    for (auto& v : ray_f<double>(*impl, theta, radii)) out.emplace_back(v.re, v.im);
  } else {
    for (auto& v : ray_f<quad>(*impl, theta, radii)) out.emplace_back(double(v.re), double(v.im));
  }
  return out;
}

std::complex<double> ExtensionModel::eval_f(const SectorPoint& z) const { return eval_ray(z.theta, {z.r}).at(0); }

nlohmann::json ExtensionModel::to_json() const {
  const auto& X = *impl;
  nlohmann::json b = nlohmann::json::array();
  for (auto& v : borel_coeffs()) b.push_back({v.real(), v.imag()});
  return {{"target", X.target.to_json()},
          {"flat", X.flat.to_json()},
          {"gamma", X.gamma},
          {"R0", X.R0},
          {"K2_hat", X.K2hat},
          {"K2_provenance", {{"fitted_K2", X.sandwich.K2}, {"fraction", X.k2_fraction},
                             {"sandwich", X.sandwich.fit.to_json()}}},
          {"C1", X.C1},
          {"precision", X.precision},
          {"p_max", X.P},
          {"borel_coeffs", b},
          {"moments", moments()}};
}

// ---------------------------------------------------------------- checks

namespace {

template <class R>
struct RemainderSample {
  std::vector<double> log_abs;  // log|R_N|, N = 0..n_max (N = 0 is log|f|)
  bool cancelled = false;
};

// log|R_N(r e^{i theta})| with R_N = f - sum_{p<N} lambda_p z^p / p!
template <class R>
std::vector<RemainderSample<R>> remainders(const ExtensionImpl& X, double theta, const std::vector<double>& radii,
                                           std::size_t n_max) {
  using std::log;
  auto f = ray_f<R>(X, theta, radii);
  const R eps = std::numeric_limits<R>::epsilon();
  std::vector<RemainderSample<R>> out(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    Cx<R> rem = f[k];
    R scale = cx_abs(f[k]);
    Cx<R> zp(R(1));
    Cx<R> z = cx_polar<R>(R(radii[k]), R(theta));
    R fact = 1;
    for (std::size_t N = 0; N <= n_max; ++N) {
      R a = cx_abs(rem);
      out[k].log_abs.push_back(a > 0 ? double(log(a)) : -kInf);
      if (N > 0 && a < R(1e3) * eps * scale) out[k].cancelled = true;
      if (N > 0) fact *= R(double(N));
      Cx<R> lam(to_r<R>(X.lam[N].re), to_r<R>(X.lam[N].im));
      Cx<R> term = lam * zp * (R(1) / fact);
      if (N == 0) term = lam;
      rem -= term;
      R ta = cx_abs(term);
      if (ta > scale) scale = ta;
      zp = zp * z;
    }
  }
  return out;
}

}  // namespace

BoundFit remainder_check(const ExtensionModel& m, const RemainderOptions& opt) {
  const auto& X = *m.impl;
  if (opt.n_max > X.P) throw Error("invalid-argument", "n_max exceeds p_max");
  BoundFit f;
  f.id = "remainder";
  auto rays = opt.rays == 1 ? std::vector<double>{0.0}
                            : lin_grid(-opt.ray_fraction * X.gamma * kPi / 2, opt.ray_fraction * X.gamma * kPi / 2,
                                       opt.rays);
  auto A = log_grid(opt.r_lo, opt.r_hi, opt.radii), B = log_grid(opt.r_lo, opt.r_hi, 2 * opt.radii);
  std::vector<double> all = A;
  all.insert(all.end(), B.begin(), B.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  WeightMatrix T(X.tau);
  auto T8 = T.level(8 * X.target.x, std::max<std::size_t>(opt.n_max, 2));

  std::map<std::pair<double, double>, std::vector<double>> logR;
  std::size_t cancelled = 0;
  bool retried = false;
  for (double th : rays) {
    std::vector<std::vector<double>> vals(all.size());
    std::vector<bool> bad(all.size());
    if (X.precision == 53) {
      auto s = remainders<double>(X, th, all, opt.n_max);
      bool any = false;
      for (std::size_t k = 0; k < s.size(); ++k) any = any || s[k].cancelled;
      if (any) {
        // cancellation in double: redo the ray in binary128
        retried = true;
        ExtensionImpl Q = X;
        Q.cache = std::make_shared<RayCache>();
        auto sq = remainders<quad>(Q, th, all, opt.n_max);
        for (std::size_t k = 0; k < sq.size(); ++k) vals[k] = sq[k].log_abs, bad[k] = sq[k].cancelled;
      } else {
        for (std::size_t k = 0; k < s.size(); ++k) vals[k] = s[k].log_abs, bad[k] = false;
      }
    } else {
      auto s = remainders<quad>(X, th, all, opt.n_max);
      for (std::size_t k = 0; k < s.size(); ++k) vals[k] = s[k].log_abs, bad[k] = s[k].cancelled;
    }
    for (std::size_t k = 0; k < all.size(); ++k) {
      if (bad[k]) {
        ++cancelled;
        continue;
      }
      logR[{th, all[k]}] = vals[k];
    }
  }
  if (logR.empty()) throw Error("precision-exhausted", "every remainder sample lost to cancellation");

  auto fit = [&](const std::vector<double>& radii, double* logC, double* logk) {
    double Y0 = -kInf;
    std::vector<double> Y(opt.n_max + 1, -kInf);
    for (double th : rays)
      for (double r : radii) {
        auto it = logR.find({th, r});
        if (it == logR.end()) continue;
        Y0 = std::max(Y0, it->second[0]);
        for (std::size_t N = 1; N <= opt.n_max; ++N)
          Y[N] = std::max(Y[N], it->second[N] - T8.log_term(N) - double(N) * std::log(r));
      }
    double lk = -kInf;
    for (std::size_t N = 1; N <= opt.n_max; ++N) lk = std::max(lk, (Y[N] - Y0) / double(N));
    *logC = Y0;
    *logk = lk;
  };
  double lc, lk, lc2, lk2;
  fit(A, &lc, &lk);
  fit(B, &lc2, &lk2);
  f.columns = {"theta", "r", "N", "log_abs_remainder", "bound_log", "margin"};
  double worst = kInf;
  for (double th : rays)
    for (double r : A) {
      auto it = logR.find({th, r});
      if (it == logR.end()) continue;
      for (std::size_t N = 0; N <= opt.n_max; ++N) {
        double bound = lc + double(N) * lk + T8.log_term(N) + double(N) * std::log(r);
        double margin = bound - it->second[N];
        worst = std::min(worst, margin);
        f.rows.push_back({th, r, double(N), it->second[N], bound, margin});
      }
    }
  f.worst_margin = worst;
  f.constants = {{"C", std::exp(lc)},       {"k", std::exp(lk)},         {"C_doubled", std::exp(lc2)},
                 {"k_doubled", std::exp(lk2)}, {"n_max", opt.n_max},     {"level", 8 * X.target.x},
                 {"h", X.target.h},          {"cancelled_samples", cancelled}, {"extended_retry", retried}};
  f.stable = std::isfinite(lc) && std::isfinite(lk) && stable_pair(std::exp(lc), std::exp(lc2)) &&
             stable_pair(std::exp(lk), std::exp(lk2));
  f.passed = f.stable;
  if (!f.stable) f.note = "(C, k) moved by 2x or more under radii doubling";
  return f;
}

nlohmann::json BorelReport::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (auto& r : rows)
    rs.push_back({{"p", r.p},
                  {"lambda", {r.lambda.real(), r.lambda.imag()}},
                  {"estimate", {r.estimate.real(), r.estimate.imag()}},
                  {"abs_error", std::abs(r.estimate - r.lambda)},
                  {"tolerance", r.tolerance},
                  {"ok", r.ok}});
  return {{"rows", rs}, {"passed", passed}};
}

BorelReport borel_check(const ExtensionModel& m, std::size_t p_check) {
  const auto& X = *m.impl;
  if (p_check > std::min<std::size_t>(6, X.P)) throw Error("invalid-argument", "p_check must be <= min(6, p_max)");
  const double r0 = X.R0 / 2;
  std::vector<double> radii;
  for (int k = 0; k <= 10; ++k) radii.push_back(std::ldexp(r0, -k));

  // lambda_hat_p(r) in binary128 unless the model is double
  std::vector<std::vector<std::complex<double>>> est(p_check + 1, std::vector<std::complex<double>>(radii.size()));
  auto fill = [&](auto tag) {
    using R = decltype(tag);
    auto f = ray_f<R>(X, 0.0, radii);
    for (std::size_t k = 0; k < radii.size(); ++k) {
      Cx<R> rem = f[k];
      R rp = 1, fact = 1;
      for (std::size_t p = 0; p <= p_check; ++p) {
        if (p > 0) {
          fact *= R(double(p));
          rp *= R(radii[k]);
        }
        Cx<R> lam(to_r<R>(X.lam[p].re), to_r<R>(X.lam[p].im));
        Cx<R> e = rem * (fact / rp);
        est[p][k] = {double(e.re), double(e.im)};
        rem -= lam * (rp / fact);
      }
    }
  };
  if (X.precision == 53) fill(double{});
  else fill(quad{});

  BorelReport rep;
  rep.passed = true;
  for (std::size_t p = 0; p <= p_check; ++p) {
    // affine least squares on the six smallest radii
    double sx = 0, sxx = 0;
    std::complex<double> sy = 0, sxy = 0;
    const std::size_t first = radii.size() - 6;
    for (std::size_t k = first; k < radii.size(); ++k) {
      sx += radii[k];
      sxx += radii[k] * radii[k];
      sy += est[p][k];
      sxy += radii[k] * est[p][k];
    }
    double n = 6, det = n * sxx - sx * sx;
    std::complex<double> icpt = (sxx * sy - sx * sxy) / det;
    if (!std::isfinite(icpt.real()) || !std::isfinite(icpt.imag()))
      throw Error("extrapolation-diverges", "non-finite extrapolation at p = " + std::to_string(p));
    std::complex<double> lam(double(X.lam[p].re), double(X.lam[p].im));
    double tol = std::max(1e-3 * std::abs(lam), 1e-3 * std::exp(X.log_env[p]));
    bool ok = std::abs(icpt - lam) <= tol;
    rep.passed = rep.passed && ok;
    rep.rows.push_back({p, lam, icpt, tol, ok});
  }
  return rep;
}

}  // namespace uh
