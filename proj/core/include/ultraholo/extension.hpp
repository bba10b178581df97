#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ultraholo/fit.hpp"
#include "ultraholo/flatkernel.hpp"
#include "ultraholo/wmatrix.hpp"

namespace uh {

struct TargetSequence {
  std::vector<std::complex<double>> lambda;
  double x = 1.0;     // matrix level
  double h = 1.0;     // norm parameter
  double norm = 1.0;  // claimed |lambda|_{T^x,h}
  std::string family;
  nlohmann::json to_json() const;
  static TargetSequence from_json(const nlohmann::json& j);
};

// max_p |lambda_p| / (h^p p! T^x_p)
double class_norm(const std::vector<std::complex<double>>& lambda, const WeightSequence& Tx, double h);
// Throws class-violation naming the first p with |lambda_p| > norm h^p p! T^x_p.
void validate_class(const TargetSequence& t, const WeightMatrix& T);

// lambda_p = h^p p! T^x_p
TargetSequence boundary_sequence(const WeightMatrix& T, double x, double h, std::size_t p_max);
// lambda = c e_k; with class_scaled, c = h^k k! T^x_k so that the norm is 1.
TargetSequence delta_sequence(const WeightMatrix& T, double x, double h, std::size_t k, std::size_t p_max,
                              bool class_scaled = true, double c = 1.0);
// lambda_p = u_p h^p p! T^x_p with u_p uniform in the unit disc.
TargetSequence random_class_member(const WeightMatrix& T, double x, double h, std::size_t p_max, std::uint64_t seed);
// Named families: delta0, delta1, boundary, random.
TargetSequence named_target(const std::string& family, const WeightMatrix& T, double x, double h,
                            std::size_t p_max, std::uint64_t seed = 0);

struct ExtensionOptions {
  std::size_t p_max = 24;
  int precision = 113;        // 53 (double) or 54..113 (binary128)
  double k2_fraction = 0.5;   // K2_hat = fraction * fitted K2
  SandwichOptions sandwich;
};

struct ExtensionImpl;

class ExtensionModel {
 public:
  const TargetSequence& target() const;
  const FlatFunctionModel& flat() const;
  double R0() const;
  double K2_hat() const;
  double K2_fit() const;
  double C1() const;
  int precision() const;
  std::size_t p_max() const;
  std::vector<std::complex<double>> borel_coeffs() const;
  std::vector<double> moments() const;

  // Partial sum of sum b_p u^p; throws tail-too-large when the geometric tail bound exceeds tol
  // times the envelope |lambda|/C1.
  std::complex<double> eval_g(double u, double tol = 1e-6) const;
  std::complex<double> eval_f(const SectorPoint& z) const;
  // f at z = r e^{i theta} for each r.
  std::vector<std::complex<double>> eval_ray(double theta, const std::vector<double>& radii) const;

  // Same flat model, moments and ray cache for another target at the same (x, h).
  ExtensionModel with_target(const TargetSequence& t) const;

  nlohmann::json to_json() const;

  std::shared_ptr<const ExtensionImpl> impl;
};

ExtensionModel build_extension(const TargetSequence& lambda, const WeightFunction& tau, double gamma,
                               const ExtensionOptions& opt = {});

struct RemainderOptions {
  std::size_t n_max = 8;
  std::size_t rays = 5;
  std::size_t radii = 40;
  double r_lo = 1e-3, r_hi = 1.0;
  double ray_fraction = 0.9;  // rays at |theta| <= fraction * gamma pi/2
};

// |f(z) - sum_{p<N} lambda_p z^p/p!| <= C k^N T^{8x}_N |z|^N, N <= n_max.
BoundFit remainder_check(const ExtensionModel& m, const RemainderOptions& opt = {});

struct BorelRow {
  std::size_t p;
  std::complex<double> lambda, estimate;
  double tolerance;
  bool ok;
};

struct BorelReport {
  std::vector<BorelRow> rows;
  bool passed = false;
  nlohmann::json to_json() const;
};

// lambda_hat_p = p! R_p(r)/r^p on the bisector, r_k = r0 2^-k, affine extrapolation to r = 0.
BorelReport borel_check(const ExtensionModel& m, std::size_t p_check = 4);

}  // namespace uh
