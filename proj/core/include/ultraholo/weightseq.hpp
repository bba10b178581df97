#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ultraholo/numeric.hpp"

namespace uh {

// A positive sequence M stored as log M_p, p = 0..P, with M_0 = 1.
class WeightSequence {
 public:
  WeightSequence(std::vector<double> log_terms, std::string label = "");

  std::size_t horizon() const { return log_terms_.size() - 1; }
  std::size_t size() const { return log_terms_.size(); }
  double log_term(std::size_t p) const { return log_terms_.at(p); }
  const std::vector<double>& log_terms() const { return log_terms_; }
  const std::string& label() const { return label_; }

  WeightSequence truncated(std::size_t P) const;

  nlohmann::json to_json() const;
  static WeightSequence from_json(const nlohmann::json& j);
  std::string to_csv() const;
  static WeightSequence from_csv(const std::string& text, std::string label = "");

 private:
  std::vector<double> log_terms_;
  std::string label_;
};

struct QuotientView {
  std::vector<double> log_mu;  // log_mu[0] = 0
};

WeightSequence gevrey(double s, std::size_t P);
WeightSequence divide_by_factorials(const WeightSequence& M, double power = 1.0);
WeightSequence multiply_by_factorials(const WeightSequence& M, double power = 1.0);
QuotientView quotients(const WeightSequence& M);
WeightSequence log_convex_minorant(const WeightSequence& M);

enum class Verdict { HoldsOnHorizon, FailsAtIndex, TrendDiverges, TrendBounded };
std::string to_string(Verdict v);
inline bool holds(Verdict v) { return v == Verdict::HoldsOnHorizon || v == Verdict::TrendBounded; }

struct SeriesPoint {
  std::size_t horizon;
  double value;
};

struct PredicateReport {
  std::string id;
  Verdict verdict = Verdict::HoldsOnHorizon;
  std::optional<std::size_t> index;  // counterexample or argmin/argmax
  double value = 0.0;                // headline value (sup, min, proxy)
  std::vector<SeriesPoint> series;   // partial values along the horizon
  nlohmann::json extra;
  nlohmann::json to_json() const;
};

struct PredicateOptions {
  int k = 2;            // beta1 / beta2 factor
  int k_max = 8;        // beta2 scans k = 2..k_max
  double eps = 0.5;     // beta2 threshold, the caller's epsilon
};

// id in {lc, slc, mg, gamma1, beta1, beta2}
PredicateReport predicate(const WeightSequence& M, const std::string& id,
                          const PredicateOptions& opt = {});

// Three-point trend: values at horizons P/4, P/2, P.
bool trend_diverges(double v1, double v2, double v3, double tol = 1e-3);

struct RelationReport {
  bool le = false, lesssim = false, approx = false, preceq = false, simeq = false;
  std::string headline;  // "≃", "≈", "≼", "≾", "≤" or "incomparable"
  double root_sup = 0, root_sup_rev = 0;  // sup (M_p/N_p)^{1/p} and reverse
  double quot_sup = 0, quot_sup_rev = 0;  // sup mu_p/nu_p and reverse
  nlohmann::json to_json() const;
};

RelationReport relation(const WeightSequence& M, const WeightSequence& N);

// Anchors a_1 < a_2 < ... with a_{j+1} >= a_j * j and nondecreasing slopes,
// extended greedily until the last anchor reaches `cover`.
std::vector<std::int64_t> pathological_anchors(std::vector<std::int64_t> seed, std::int64_t cover);
std::vector<std::int64_t> default_pathological_seed();

// The piecewise-linear exponent f at integer p.
double pathological_f(const std::vector<std::int64_t>& anchors, double p);
void validate_pathological_anchors(const std::vector<std::int64_t>& anchors);

WeightSequence pathological_sequence(double q, std::vector<std::int64_t> anchors, std::size_t P);

}  // namespace uh
