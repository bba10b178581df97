#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ultraholo/sources.hpp"

namespace uh {

class Node {
 public:
  virtual ~Node() = default;
  virtual double eval(double t) const = 0;
  virtual nlohmann::json to_json() const = 0;
  // Closed forms where the primitive admits one.
  virtual std::optional<double> phi_star(double) const { return std::nullopt; }
  virtual std::optional<double> upper_star(double) const { return std::nullopt; }
  // Points in [lo, hi] where the function may fail to be smooth.
  virtual void breakpoints(double, double, std::vector<double>&, std::size_t) const {}
};

using Expr = std::shared_ptr<const Node>;

class WeightFunction {
 public:
  WeightFunction() = default;
  explicit WeightFunction(Expr e) : e_(std::move(e)) {}

  double operator()(double t) const { return eval(t); }
  double eval(double t) const;
  const Expr& expr() const { return e_; }
  nlohmann::json to_json() const;
  std::string describe() const { return to_json().dump(); }
  std::vector<double> breakpoints(double lo, double hi, std::size_t cap = 4096) const;

  static WeightFunction from_json(const nlohmann::json& j);
  // Shorthand (power:0.5, logpower:2, gevrey:2, pathological), inline JSON or a file path.
  static WeightFunction parse(const std::string& spec);

 private:
  Expr e_;
};

WeightFunction power(double alpha);
WeightFunction log_power(double s);
WeightFunction from_sequence(SourcePtr src);
WeightFunction from_sequence(const WeightSequence& M);
WeightFunction ramified(const WeightFunction& w, double s);
inline WeightFunction inversion(const WeightFunction& w) { return ramified(w, -1.0); }
WeightFunction scaled(double c, const WeightFunction& w);
WeightFunction sum(std::vector<WeightFunction> ws);
WeightFunction max_of(std::vector<WeightFunction> ws);
WeightFunction constant(double c);
WeightFunction upper_star_of(const WeightFunction& w);
WeightFunction lower_star_of(const WeightFunction& h);
WeightFunction kappa_of(const WeightFunction& w);

// omega_M(t) by binary search over quotients.
double omega_M(const SequenceSource& M, double t);
double omega_M(const WeightSequence& M, double t);
// sup_p (p log t - log M_p) by a full scan, for cross-checks.
double omega_M_bruteforce(const WeightSequence& M, double t, std::size_t* argmax = nullptr);
// h_M(t) = exp(-omega_M(1/t)); the direct inf over the horizon is h_direct.
double h_eval(const WeightSequence& M, double t);
double h_direct(const WeightSequence& M, double t);

double kappa(const WeightFunction& w, double t, double tol = 1e-10);

struct PropertyVerdict {
  bool holds = false;
  std::string evidence;
  nlohmann::json witness;
};

struct PropertyDiagnostics {
  PropertyVerdict omega1, omega3, omega4, omega5, omega6, snq;
  double L = 0;  // measured (omega_1) constant: omega(2t) <= L (omega(t) + 1)
  nlohmann::json to_json() const;
};

struct DiagnosticsOptions {
  double t_max = 1e8;
  std::size_t n = 200;
};

PropertyDiagnostics diagnostics(const WeightFunction& w, const DiagnosticsOptions& opt = {});

}  // namespace uh
