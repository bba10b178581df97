#include <doctest.h>

#include <cmath>

#include "ultraholo/wmatrix.hpp"

using namespace uh;

TEST_SUITE("wmatrix") {

TEST_CASE("default grid") {
  auto g = default_index_grid();
  REQUIRE(g.size() == 9);
  CHECK(g.front() == 0.125);
  CHECK(g.back() == 32.0);
}

TEST_CASE("levels of a power weight") {
  // log W^x_p = phi*(x p) / x with phi*(y) = (y/a) log(y/a) - y/a
  const double a = 0.5;
  WeightMatrix W(power(a), default_index_grid(), 100);
  for (double x : {0.5, 1.0, 3.0}) {
    auto L = W.level(x);
    for (int p : {1, 5, 40, 100}) {
      double q = x * p / a;
      CHECK(L.log_term(p) == doctest::Approx((q * std::log(q) - q) / x).epsilon(1e-10));
    }
  }
  auto M = materialize(power(a), 2.0, 50, ConjMode::Numeric);
  CHECK(M.log_term(50) == doctest::Approx(W.level(2.0, 50).log_term(50)).epsilon(1e-9));
}

TEST_CASE("level covering doubles the horizon") {
  WeightMatrix W(power(0.5), default_index_grid(), 64);
  auto L = W.level_covering(1.0, 1e4);
  auto mu = quotients(L).log_mu;
  CHECK(std::exp(mu.back()) > 1e4);
  CHECK((L.horizon() & (L.horizon() - 1)) == 0);
}

TEST_CASE("mg across levels and absorption") {
  WeightMatrix W(power(0.5));
  for (double l : {0.5, 1.0, 2.0}) {
    auto f = check_mg_across_levels(W, l, 60);
    CHECK(f.passed);
  }
  auto ab = check_absorption(W, 2.0, 1.0);
  CHECK(ab.stable);
}

TEST_CASE("matrix equivalence") {
  WeightMatrix A(power(0.5)), B(scaled(2.0, power(0.5)));
  auto e = matrix_equivalence(A, B);
  CHECK(e.verdict == "{≈}");
  WeightMatrix C(power(0.25));
  auto f = matrix_equivalence(A, C);
  CHECK(f.verdict != "{≈}");
}

}
