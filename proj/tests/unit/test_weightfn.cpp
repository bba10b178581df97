#include <doctest.h>

#include <cmath>

#include "ultraholo/sources.hpp"
#include "ultraholo/weightfn.hpp"

using namespace uh;

namespace {
double omega_gevrey1_oracle(double t) {
  double best = 0;
  for (int p = 1; p < 2000; ++p) best = std::max(best, p * std::log(t) - std::lgamma(p + 1.0));
  return best;
}
}  // namespace

TEST_SUITE("weightfn") {

TEST_CASE("primitives") {
  CHECK(power(0.5)(4.0) == doctest::Approx(2.0));
  CHECK(log_power(2.0)(std::exp(3.0)) == doctest::Approx(9.0));
  CHECK(log_power(2.0)(0.5) == 0.0);
  CHECK(ramified(power(0.5), 2.0)(7.0) == doctest::Approx(7.0));
  CHECK(inversion(power(1.0))(4.0) == doctest::Approx(0.25));
  CHECK(scaled(3.0, power(1.0))(2.0) == doctest::Approx(6.0));
  CHECK(sum({power(1.0), constant(1.0)})(2.0) == doctest::Approx(3.0));
  CHECK(max_of({power(1.0), power(0.5)})(4.0) == doctest::Approx(4.0));
}

TEST_CASE("spec parsing and json round trip") {
  for (std::string spec : {"power:0.5", "logpower:2", "gevrey:2"}) {
    auto w = WeightFunction::parse(spec);
    auto back = WeightFunction::from_json(w.to_json());
    for (double t : {0.5, 3.0, 100.0}) CHECK(back(t) == doctest::Approx(w(t)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(WeightFunction::parse("nonsense:1"), Error);
}

TEST_CASE("associated function of gevrey(1)") {
  auto w = from_sequence(gevrey_source(1.0));
  for (double t : {0.5, 1.0, 2.5, 10.0, 333.0})
    CHECK(w(t) == doctest::Approx(omega_gevrey1_oracle(t)).epsilon(1e-12));
  // omega_M vanishes for t <= mu_1 = 1
  CHECK(w(0.9) == 0.0);
}

TEST_CASE("h_M two ways") {
  auto M = gevrey(1.0, 300);
  for (double t : {1e-2, 0.1, 0.3, 1.0}) CHECK(h_eval(M, t) == doctest::Approx(h_direct(M, t)).epsilon(1e-12));
  CHECK(h_eval(M, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("kappa of a power") {
  // int_0^inf (t e^v)^a e^{-v} dv = t^a / (1 - a)
  for (double a : {0.25, 0.5}) {
    auto w = power(a);
    for (double t : {1.0, 10.0, 1e4}) CHECK(kappa(w, t) == doctest::Approx(std::pow(t, a) / (1 - a)).epsilon(1e-7));
  }
  CHECK_THROWS_AS(kappa(power(1.0), 2.0), Error);
}

TEST_CASE("diagnostics") {
  auto d = diagnostics(power(0.5));
  CHECK(d.omega1.holds);
  CHECK(d.snq.holds);
  CHECK(d.L == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
  auto lin = diagnostics(power(1.0));
  CHECK_FALSE(lin.snq.holds);
}

}
