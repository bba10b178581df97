#include <doctest.h>

#include <cmath>

#include "ultraholo/conjugate.hpp"

using namespace uh;

TEST_SUITE("conjugate") {

TEST_CASE("maximize_log_abscissa finds interior maxima") {
  auto r = maximize_log_abscissa([](double u) { return -(u - 1.3) * (u - 1.3) + 2; });
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.arg == doctest::Approx(1.3).epsilon(1e-6));
  CHECK_THROWS_AS(maximize_log_abscissa([](double u) { return u; }), Error);
}

TEST_CASE("phi_star of a power, closed form and numeric") {
  // sup_y (x y - e^{a y}) = (x/a) log(x/a) - x/a
  for (double a : {0.25, 0.5, 0.75}) {
    auto w = power(a);
    for (double x : {0.1, 1.0, 7.0, 50.0}) {
      double q = x / a, oracle = q * std::log(q) - q;
      CHECK(phi_star(w, x, ConjMode::Numeric) == doctest::Approx(oracle).epsilon(1e-9));
      CHECK(phi_star(w, x, ConjMode::Auto) == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("upper star of the square root") {
  auto w = power(0.5);
  for (double s : log_grid(1e-3, 1e3, 25))
    CHECK(upper_star(w, s, ConjMode::Numeric) == doctest::Approx(1 / (4 * s)).epsilon(1e-8));
  CHECK(std::isinf(upper_star(w, 0.0)));
}

TEST_CASE("lower star inverts the upper star for concave weights") {
  auto w = power(0.5);
  auto star = upper_star_of(w);
  for (double t : log_grid(1.0, 1e3, 15)) CHECK(lower_star(star, t) == doctest::Approx(w(t)).epsilon(1e-6));
  // h(s) = 1/s: inf_s (1/s + t s) = 2 sqrt(t)
  CHECK(lower_star([](double s) { return 1 / s; }, 9.0) == doctest::Approx(6.0).epsilon(1e-8));
}

TEST_CASE("least concave majorant") {
  // max(sqrt t, 1): the tangent from (0, 1) touches sqrt t at t = 4, so the majorant is 1 + t/4 there
  auto w = max_of({power(0.5), constant(1.0)});
  auto m = least_concave_majorant(w);
  CHECK(m(2.0) == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(m(9.0) == doctest::Approx(3.0).epsilon(1e-6));
  auto c = least_concave_majorant(power(0.5));
  for (double t : {0.5, 4.0, 100.0}) CHECK(c(t) == doctest::Approx(std::sqrt(t)).epsilon(1e-6));
}

}
