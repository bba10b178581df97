#include "ultraholo/wmatrix.hpp"

#include <algorithm>
#include <cmath>

namespace uh {

WeightSequence materialize(const WeightFunction& w, double x, std::size_t P, ConjMode mode) {
  if (!(x > 0)) throw Error("invalid-argument", "matrix level must be > 0");
  std::vector<double> v(P + 1);
  v[0] = 0.0;
  for (std::size_t p = 1; p <= P; ++p) v[p] = phi_star(w, x * double(p), mode) / x;
  return WeightSequence(std::move(v), "W^" + std::to_string(x));
}

std::vector<double> default_index_grid() {
  std::vector<double> g;
  for (int k = -3; k <= 5; ++k) g.push_back(std::ldexp(1.0, k));
  return g;
}

WeightMatrix::WeightMatrix(WeightFunction w, std::vector<double> grid, std::size_t P, ConjMode mode)
    : w_(std::move(w)), grid_(std::move(grid)), P_(P), mode_(mode), cache_(std::make_shared<Cache>()) {
  std::sort(grid_.begin(), grid_.end());
}

WeightSequence WeightMatrix::base_level(double x, std::size_t P) const {
  {
    std::lock_guard<std::mutex> lock(cache_->m);
    auto it = cache_->levels.find({x, P});
    if (it != cache_->levels.end()) return *it->second;
  }
  auto seq = std::make_shared<const WeightSequence>(materialize(w_, x, P, mode_));
  std::lock_guard<std::mutex> lock(cache_->m);
  cache_->levels.emplace(std::make_pair(x, P), seq);
  return *seq;
}

WeightSequence WeightMatrix::level(double x) const { return level(x, P_); }

WeightSequence WeightMatrix::level(double x, std::size_t P) const {
  WeightSequence s = base_level(x, P);
  if (shift_ > 0) return multiply_by_factorials(s, shift_);
  if (shift_ < 0) return divide_by_factorials(s, -shift_);
  return s;
}

WeightSequence WeightMatrix::level_covering(double x, double t_max, std::size_t P_cap) const {
  std::size_t P = P_;
  for (;;) {
    WeightSequence s = level(x, P);
    if (s.log_term(P) - s.log_term(P - 1) > std::log(t_max) || P >= P_cap) return s;
    P *= 2;
  }
}

WeightMatrix WeightMatrix::hat() const {
  WeightMatrix m = *this;
  m.shift_ += 1;
  return m;
}

WeightMatrix WeightMatrix::unhat() const {
  WeightMatrix m = *this;
  m.shift_ -= 1;
  return m;
}

nlohmann::json WeightMatrix::to_json() const {
  nlohmann::json levels = nlohmann::json::array();
  for (double x : grid_) levels.push_back({{"x", x}, {"log_terms", level(x).log_terms()}});
  return {{"source", w_.to_json()}, {"grid", grid_}, {"horizon", P_}, {"factorial_shift", shift_},
          {"levels", levels}};
}

BoundFit check_mg_across_levels(const WeightMatrix& W, double l, std::size_t j_max) {
  BoundFit f;
  f.id = "mg-across-levels";
  std::size_t P = std::max(W.horizon(), j_max);
  auto A = W.level(l, P), B = W.level(2 * l, P);
  std::size_t violations = 0;
  double worst = kInf;
  f.columns = {"j", "k", "lhs_log", "rhs_log", "margin"};
  for (std::size_t j = 0; j <= j_max; ++j)
    for (std::size_t k = 0; j + k <= j_max; ++k) {
      double lhs = A.log_term(j + k), rhs = B.log_term(j) + B.log_term(k);
      double margin = rhs - lhs;
      worst = std::min(worst, margin);
      if (margin < -1e-9) ++violations;
      f.rows.push_back({double(j), double(k), lhs, rhs, margin});
    }
  f.worst_margin = worst;
  f.constants = {{"l", l}, {"j_max", j_max}, {"violations", violations}};
  f.stable = true;
  f.passed = violations == 0;
  return f;
}

BoundFit check_absorption(const WeightMatrix& W, double h, double l, const AbsorptionOptions& opt) {
  BoundFit f;
  f.id = "absorption";
  double L = opt.L;
  if (L <= 0) {
    auto d = diagnostics(W.source());
    if (!d.omega1.holds) throw Error("omega1-fails", "weight lacks (omega_1) on the grid");
    L = d.L;
  }
  int a = 1;
  while (std::exp(double(a)) < h) ++a;
  double A = opt.A > 0 ? opt.A : std::pow(L * (L + 1), a);
  auto lo = W.level(l, opt.P), hi = W.level(A * l, opt.P);
  auto logD = [&](std::size_t P) {
    double d = 0.0;
    for (std::size_t j = 0; j <= P; ++j) d = std::max(d, double(j) * std::log(h) + lo.log_term(j) - hi.log_term(j));
    return d;
  };
  double d_full = logD(opt.P), d_half = logD(opt.P / 2);
  f.columns = {"j", "lhs_log", "rhs_log_without_D"};
  for (std::size_t j = 0; j <= opt.P; ++j)
    f.rows.push_back({double(j), double(j) * std::log(h) + lo.log_term(j), hi.log_term(j)});
  f.constants = {{"L", L}, {"a", a}, {"A", A}, {"D", std::exp(d_full)}, {"D_half_horizon", std::exp(d_half)}};
  f.worst_margin = -d_full;
  f.stable = std::isfinite(d_full) && d_full - d_half < std::log(2.0);
  f.passed = f.stable;
  return f;
}

nlohmann::json MatrixEquivalence::to_json() const {
  auto side = [](const std::vector<LevelPairing>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (auto& p : v)
      a.push_back({{"x", p.x}, {"y", std::isnan(p.y) ? nlohmann::json(nullptr) : nlohmann::json(p.y)},
                   {"constant", p.constant}});
    return a;
  };
  return {{"verdict", verdict}, {"forward", side(forward)}, {"backward", side(backward)}};
}

namespace {

std::vector<LevelPairing> pair_levels(const WeightMatrix& A, const WeightMatrix& B, bool* all) {
  std::vector<LevelPairing> out;
  *all = true;
  std::size_t P = std::min(A.horizon(), B.horizon());
  for (double x : A.grid()) {
    LevelPairing lp{x, std::nan(""), kInf};
    auto ax = A.level(x, P);
    for (double y : B.grid()) {
      auto r = relation(ax, B.level(y, P));
      if (r.lesssim) {
        lp.y = y;
        lp.constant = r.root_sup;
        break;
      }
    }
    if (std::isnan(lp.y)) *all = false;
    out.push_back(lp);
  }
  return out;
}

}  // namespace

MatrixEquivalence matrix_equivalence(const WeightMatrix& A, const WeightMatrix& B) {
  MatrixEquivalence e;
  e.forward = pair_levels(A, B, &e.a_le_b);
  e.backward = pair_levels(B, A, &e.b_le_a);
  if (e.a_le_b && e.b_le_a) e.verdict = "{≈}";
  else if (e.a_le_b) e.verdict = "{≾}";
  else if (e.b_le_a) e.verdict = "{≿}";
  else e.verdict = "grid-exhausted";
  return e;
}

}  // namespace uh
