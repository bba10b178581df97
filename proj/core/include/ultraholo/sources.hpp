#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ultraholo/weightseq.hpp"

namespace uh {

// Read-only access to a log-convex sequence, finite table or closed form.
class SequenceSource {
 public:
  virtual ~SequenceSource() = default;
  virtual double log_term(std::int64_t p) const = 0;
  virtual double log_mu(std::int64_t p) const { return p == 0 ? 0.0 : log_term(p) - log_term(p - 1); }
  virtual std::int64_t horizon() const = 0;
  // Largest p <= horizon with log mu_p <= log_t (mu nondecreasing).
  virtual std::int64_t index_for(double log_t) const;
  virtual nlohmann::json to_json() const = 0;
  virtual std::string label() const = 0;
  // Sequence of the first P+1 terms.
  WeightSequence materialize(std::size_t P) const;
};

using SourcePtr = std::shared_ptr<const SequenceSource>;

// Table input; the log-convex minorant is applied on construction.
SourcePtr table_source(const WeightSequence& M);
// log M_p = s log p!
SourcePtr gevrey_source(double s);
// log m_p = f(p) log q for the piecewise-linear exponent f.
SourcePtr pathological_source(double q = std::exp(1.0), std::vector<std::int64_t> anchors = {});
// log M_p = log base_p + c log p!, c >= 0.
SourcePtr factorial_shift_source(SourcePtr base, double c);

SourcePtr source_from_json(const nlohmann::json& j);

inline constexpr std::int64_t kClosedFormHorizon = std::int64_t(1) << 52;

}  // namespace uh
