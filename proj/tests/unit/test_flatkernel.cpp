#include <doctest.h>

#include <cmath>
#include <complex>

#include "ultraholo/flatkernel.hpp"

using namespace uh;

namespace {
// For tau = t^a the Poisson integral has the closed form E(xi) = -xi^{-a} / cos(pi a / (2 s)).
double log_abs_G_oracle(double alpha, double s, double a, double r, double theta) {
  std::complex<double> v = std::pow(std::polar(r, theta), -alpha);
  return -a * v.real() / std::cos(kPi * alpha / (2 * s));
}

// int_0^inf t^p exp(-b t^alpha) dt
double moment_oracle(double alpha, double s, double a, std::size_t p) {
  double b = a / std::cos(kPi * alpha / (2 * s)), k = (double(p) + 1) / alpha;
  return std::exp(std::lgamma(k) - std::log(alpha) - k * std::log(b));
}
}  // namespace

TEST_SUITE("flatkernel") {

TEST_CASE("sector points") {
  SectorPoint z{4.0, 0.3};
  auto w = z.power(0.5);
  CHECK(w.r == doctest::Approx(2.0));
  CHECK(w.theta == doctest::Approx(0.15));
  CHECK(z.invert().r == doctest::Approx(0.25));
  CHECK_THROWS_AS((SectorPoint{1.0, 2.0}).to_halfplane(), Error);
}

TEST_CASE("pure-power flat function matches the closed form") {
  for (double alpha : {0.5, 0.25}) {
    auto m = build_model(power(alpha), 1.0, 1.0);
    CHECK(m.alpha_hat() == doctest::Approx(alpha).epsilon(1e-9));
    const double s = m.s(), th_max = 0.95 * m.gamma() * kPi / 2;
    for (double th : {-th_max, 0.0, 0.5 * th_max, th_max})
      for (double r : {1e-2, 0.3, 1.0, 20.0}) {
        double want = log_abs_G_oracle(alpha, s, 1.0, r, th);
        CHECK(m.log_abs_G({r, th}) == doctest::Approx(want).epsilon(1e-6));
      }
    // a scales the exponent
    auto m2 = m.with_a(2.0);
    CHECK(m2.log_abs_G({0.5, 0.2}) == doctest::Approx(2 * m.log_abs_G({0.5, 0.2})).epsilon(1e-12));
  }
}

TEST_CASE("sector and half-plane guards") {
  auto m = build_model(power(0.5), 1.0, 1.0);
  CHECK_THROWS_AS(m.eval_G({1.0, m.delta() * kPi / 2}), Error);
  CHECK_THROWS_AS(m.eval_F({-1.0, 0.0}), Error);
  CHECK_THROWS_AS(build_model(power(0.5), 3.0, 1.0), Error);
}

TEST_CASE("moments match the closed form") {
  const double alpha = 0.5;
  auto m = build_model(power(alpha), 1.0, 1.0);
  for (std::size_t p : {0u, 1u, 5u, 15u})
    CHECK(m.moment(p) == doctest::Approx(moment_oracle(alpha, m.s(), 1.0, p)).epsilon(1e-6));
  auto r = m.refined();
  CHECK(r.moment(10) == doctest::Approx(m.moment(10)).epsilon(1e-6));
}

TEST_CASE("sandwich and moment sandwich are stable") {
  auto m = build_model(power(0.5), 1.0, 1.0);
  auto sw = verify_flat_sandwich(m);
  CHECK(sw.fit.stable);
  CHECK(sw.K1 <= std::exp(1.0) + 1e-12);
  auto ms = verify_moment_sandwich(m, sw.K2, sw.K3);
  CHECK(ms.stable);
}

TEST_CASE("integrability and poisson tail of a power") {
  CHECK(verify_integrability(power(0.5)).stable);
  // int_0^inf t^{-1/2} / (1 + t^2) dt = pi / sqrt 2
  auto f = verify_poisson_tail(power(0.5));
  CHECK(f.stable);
  CHECK(f.constants["extrapolated_integral"].get<double>() == doctest::Approx(kPi / std::sqrt(2.0)).epsilon(1e-3));
}

}
