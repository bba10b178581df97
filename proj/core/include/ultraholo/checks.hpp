#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ultraholo/fit.hpp"
#include "ultraholo/sources.hpp"
#include "ultraholo/weightfn.hpp"

namespace uh {

enum class Strategy { Exact, Fitted, Tolerance };
std::string to_string(Strategy s);

struct CheckCache;

// Operands shared by all registry entries.
struct CheckContext {
  WeightFunction omega = power(0.5);  // weight for the matrix and conjugate checks
  SourcePtr sequence = gevrey_source(2.0);
  SourcePtr pathological = pathological_source();
  WeightFunction tau = from_sequence(gevrey_source(1.0));  // weight of the flat and extension checks
  double gamma = 0.5;
  double x = 1.0;
  double h = 1.0;
  std::string target = "boundary";
  int precision = 113;
  std::uint64_t seed = 0;
  std::size_t horizon = 200;
  double tol = 1e-9;  // log slack of exact checks

  // Flat model and extension shared by the kernel checks; filled on first use.
  mutable std::shared_ptr<CheckCache> cache;

  nlohmann::json to_json() const;
  // Missing keys keep their defaults. Requires "version": 1 when present.
  static CheckContext from_json(const nlohmann::json& j);
};

struct CheckOutcome {
  bool passed = false;
  bool stable = true;  // meaningful for fitted checks
  std::vector<BoundFit> fits;
  nlohmann::json details = nlohmann::json::object();
};

struct CheckEntry {
  std::string id;
  std::string anchor;  // the formula the check is bound to
  Strategy strategy = Strategy::Exact;
  std::function<CheckOutcome(const CheckContext&)> run;
};

struct CheckResult {
  std::string id, anchor;
  Strategy strategy = Strategy::Exact;
  bool passed = false, stable = false;
  std::string error;  // operand construction or evaluation failure
  double seconds = 0;
  CheckOutcome outcome;

  // A check counts as failing the run only when it is exact and did not pass.
  bool hard_failure() const { return strategy == Strategy::Exact && !passed; }
  nlohmann::json to_json(bool meta = true) const;
  // Rows of every fit, with a leading "part" column naming the fit.
  std::string to_csv() const;
};

struct RunReport {
  std::vector<CheckResult> results;
  bool exact_ok() const;
  bool fitted_stable() const;
  nlohmann::json summary(bool meta = true) const;
  // index.json, summary.json, summary.txt and <id>.csv under dir.
  void write_bundle(const std::string& dir, const CheckContext& ctx, bool meta = true) const;
};

class Registry {
 public:
  // Throws unanchored-entry for an empty anchor and duplicate-id for a repeated id.
  void add(CheckEntry e);
  const std::vector<CheckEntry>& entries() const { return entries_; }
  const CheckEntry& find(const std::string& id) const;  // unknown-id

  // Entries run in parallel; results come back in registry order.
  RunReport run(const std::vector<std::string>& ids, const CheckContext& ctx) const;
  RunReport run_all(const CheckContext& ctx) const;

 private:
  std::vector<CheckEntry> entries_;
};

const Registry& default_registry();

}  // namespace uh
