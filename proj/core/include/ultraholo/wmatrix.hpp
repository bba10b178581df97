#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "ultraholo/conjugate.hpp"
#include "ultraholo/fit.hpp"
#include "ultraholo/weightseq.hpp"

namespace uh {

// log W^x_p = phi*_omega(x p) / x
WeightSequence materialize(const WeightFunction& w, double x, std::size_t P, ConjMode mode = ConjMode::Auto);

std::vector<double> default_index_grid();  // {2^k : k = -3..5}

class WeightMatrix {
 public:
  explicit WeightMatrix(WeightFunction w, std::vector<double> grid = default_index_grid(),
                        std::size_t P = 200, ConjMode mode = ConjMode::Auto);

  // Level x at the default horizon; any x > 0 is materialized on demand.
  WeightSequence level(double x) const;
  WeightSequence level(double x, std::size_t P) const;
  // Smallest doubling of the horizon whose last quotient exceeds t_max.
  WeightSequence level_covering(double x, double t_max, std::size_t P_cap = 8192) const;

  WeightMatrix hat() const;
  WeightMatrix unhat() const;
  int factorial_shift() const { return shift_; }

  const WeightFunction& source() const { return w_; }
  const std::vector<double>& grid() const { return grid_; }
  std::size_t horizon() const { return P_; }
  nlohmann::json to_json() const;

 private:
  struct Cache {
    std::mutex m;
    std::map<std::pair<double, std::size_t>, std::shared_ptr<const WeightSequence>> levels;
  };
  WeightSequence base_level(double x, std::size_t P) const;

  WeightFunction w_;
  std::vector<double> grid_;
  std::size_t P_;
  ConjMode mode_;
  int shift_ = 0;
  std::shared_ptr<Cache> cache_;
};

BoundFit check_mg_across_levels(const WeightMatrix& W, double l, std::size_t j_max);

struct AbsorptionOptions {
  double L = 0;        // (omega_1) constant; measured when 0
  double A = 0;        // override of the recipe A = (L(L+1))^a when > 0
  std::size_t P = 200;
};
BoundFit check_absorption(const WeightMatrix& W, double h, double l, const AbsorptionOptions& opt = {});

struct LevelPairing {
  double x;
  double y;  // NaN when no pairing exists on the grid
  double constant;
};

struct MatrixEquivalence {
  bool a_le_b = false, b_le_a = false;
  std::string verdict;  // "{≈}", "{≾}", "{≿}" or "grid-exhausted"
  std::vector<LevelPairing> forward, backward;
  nlohmann::json to_json() const;
};

MatrixEquivalence matrix_equivalence(const WeightMatrix& A, const WeightMatrix& B);

}  // namespace uh
