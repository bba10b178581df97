#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ultraholo/weightfn.hpp"
#include "ultraholo/weightseq.hpp"

namespace uh {

struct IndexEstimate {
  double value = 0;        // may be +inf or -inf
  std::string method;
  double horizon = 0;      // P for sequences, T_max for functions
  double stability = 0;    // |estimate - estimate at the reduced horizon|
  nlohmann::json extra;
  nlohmann::json to_json() const;
};

struct GammaSeqOptions {
  double a = 4.0;      // slack of the quasi-monotonicity test
  double eta = 0.02;   // allowed decline growth per horizon doubling, in units of log 2
  bool sensitivity = true;
};

IndexEstimate gamma_seq(const WeightSequence& M, const GammaSeqOptions& opt = {});

struct GammaFnOptions {
  double t_max = 1e8;
  std::size_t n = 400;
  double margin = 0.02;
  double gamma_max = 64.0;
  bool horizon_check = true;  // re-run at t_max^2 for the stability margin and the +inf sentinel
};

IndexEstimate gamma_fn(const WeightFunction& w, const GammaFnOptions& opt = {});

struct IdentityRow {
  std::string id;
  double lhs = 0, rhs = 0;
  double tolerance = 0;
  bool agrees = false;
  std::string note;
};

struct IdentityReport {
  std::vector<IdentityRow> rows;
  bool all_agree() const;
  nlohmann::json to_json() const;
};

// Identities for a weight function: (omega_1) vs gamma > 0, (omega_snq) vs gamma > 1,
// gamma(omega) = gamma((omega*)^iota) + 1 and gamma((tau^iota)_star) = gamma(tau) + 1.
IdentityReport check_index_identities(const WeightFunction& w);
// Identities for a sequence M = p! m: gamma(omega_M) = gamma(omega_m) + 1, gamma(omega_M) >= gamma(M),
// gamma(M) = gamma(m) + 1. `m_src` is the divided sequence as a closed form or table.
IdentityReport check_index_identities(const WeightSequence& M, SourcePtr m_src, SourcePtr M_src);

}  // namespace uh
