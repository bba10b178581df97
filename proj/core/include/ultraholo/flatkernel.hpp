#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <nlohmann/json.hpp>

#include "ultraholo/fit.hpp"
#include "ultraholo/indices.hpp"
#include "ultraholo/weightfn.hpp"

namespace uh {

// Point on the Riemann surface of the logarithm.
struct SectorPoint {
  double r = 1.0;
  double theta = 0.0;

  SectorPoint power(double s) const { return {std::pow(r, s), s * theta}; }
  SectorPoint invert() const { return {1.0 / r, -theta}; }
  // Only for |theta| < pi/2.
  std::complex<double> to_halfplane() const;
};

struct FlatRule;

struct FlatModelOptions {
  double panel_width = 0.5;    // in log t
  unsigned nodes = 16;         // Gauss nodes per full-width panel
  double x_hi = 80.0;          // upper end of the log t range
  double tail_efolds = 40.0;   // target decay of the neglected t -> 0 part
  double x_lo_limit = -300.0;
  std::size_t kink_cap = 1000;
};

class FlatFunctionModel {
 public:
  const WeightFunction& tau() const { return tau_; }
  double gamma() const { return gamma_; }
  double a() const { return a_; }
  double delta() const { return delta_; }
  double s() const { return s_; }
  const IndexEstimate& gamma_tau() const { return gamma_tau_; }
  double alpha_hat() const { return alpha_hat_; }
  const FlatModelOptions& options() const { return opt_; }
  const std::shared_ptr<const FlatRule>& rule() const { return rule_; }

  std::complex<double> eval_F(std::complex<double> w) const;
  std::complex<double> eval_G(const SectorPoint& z) const;
  // log|G_a| without exponentiating; -inf never occurs in practice but underflow of G does.
  double log_abs_G(const SectorPoint& z) const;
  std::complex<double> eval_kernel(const SectorPoint& z) const;
  // m_a(p) = int_0^inf t^p G_a(1/t) dt, memoized.
  double moment(std::size_t p) const;
  // Trapezoid step of the moment quadrature (in log t).
  static constexpr double kMomentStep = 0.05;

  FlatFunctionModel with_a(double a) const;
  // Same parameters with a finer J rule and half the moment step.
  FlatFunctionModel refined() const;
  double moment_step() const { return moment_step_; }

  nlohmann::json to_json() const;

 private:
  friend FlatFunctionModel build_model(const WeightFunction&, double, double, const FlatModelOptions&);
  struct Memo {
    std::mutex m;
    std::map<std::size_t, double> moments;
  };
  struct GridMemo {
    std::once_flag once;
    std::vector<double> exponent;  // a = 1 exponent at t = e^x on the moment grid
  };
  void check_sector(const SectorPoint& z) const;
  const std::vector<double>& moment_grid_exponent() const;

  WeightFunction tau_;
  double gamma_ = 0, a_ = 1, delta_ = 0, s_ = 1;
  IndexEstimate gamma_tau_;
  double alpha_hat_ = 0;
  FlatModelOptions opt_;
  std::shared_ptr<const FlatRule> rule_;
  double moment_step_ = kMomentStep;
  std::shared_ptr<Memo> memo_ = std::make_shared<Memo>();
  std::shared_ptr<GridMemo> grid_ = std::make_shared<GridMemo>();
};

// delta = (gamma + gamma^(tau)) / 2, s = midpoint of (1/gamma^(tau), 1/delta).
FlatFunctionModel build_model(const WeightFunction& tau, double gamma, double a,
                              const FlatModelOptions& opt = {});

// Moment grid in log t shared by all moment evaluations.
inline constexpr double kMomentXLo = -90.0, kMomentXHi = 40.0;

struct SandwichOptions {
  std::size_t rays = 5;
  std::size_t radii = 60;
  double r_lo = 1e-3, r_hi = 1e3;
  double k1_log_budget = 1.0;  // log K1 allowed when fitting K2
};

struct SandwichFit {
  double K1 = 1, K2 = 0, K3 = 0;
  BoundFit fit;
};

// K1^{-a} exp(-2a tau^iota(K2|xi|)) <= |G_a(xi)| <= exp(-(a/2) tau^iota(K3|xi|)) on |theta| <= gamma pi/2.
SandwichFit verify_flat_sandwich(const FlatFunctionModel& m, const SandwichOptions& opt = {});

// |G_a(xi)| >= K4 h_{T^x}(K2|xi|), x = 1/(4a).
BoundFit verify_optimal_lower(const FlatFunctionModel& m, double K2, const SandwichOptions& opt = {});

// C1 (K2/2)^p T_p^{1/(2a)} <= m_a(p) <= C2 K3^p T_p^{4/a}, p <= p_max.
BoundFit verify_moment_sandwich(const FlatFunctionModel& m, double K2, double K3, std::size_t p_max = 15);

// sup over rays of int_0^{t0} |e_a(t e^{i s})| / t dt <= t0.
BoundFit verify_kernel_integrability(const FlatFunctionModel& m);
// |e_a(z)| <= C h_{T^{4/a}}(K/|z|).
BoundFit verify_kernel_decay(const FlatFunctionModel& m, const SandwichOptions& opt = {});

// int_0^1 tau^iota(t y) dt <= C (tau^iota(y) + 1) for y over six decades.
BoundFit verify_integrability(const WeightFunction& tau);
// int_0^inf tau(1/t) / (1 + t^2) dt converges as the lower cutoff shrinks.
BoundFit verify_poisson_tail(const WeightFunction& tau);

}  // namespace uh
