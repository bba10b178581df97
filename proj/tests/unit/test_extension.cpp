#include <doctest.h>

#include <cmath>

#include "ultraholo/extension.hpp"

using namespace uh;

TEST_SUITE("extension") {

TEST_CASE("target families and class norm") {
  WeightMatrix T(power(0.5));
  auto b = boundary_sequence(T, 1.0, 1.0, 10);
  auto L = T.level(1.0);
  CHECK(class_norm(b.lambda, L, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(b.lambda[3]) == doctest::Approx(6 * std::exp(L.log_term(3))).epsilon(1e-12));
  auto d = delta_sequence(T, 1.0, 1.0, 1, 10);
  CHECK(d.norm == doctest::Approx(1.0));
  CHECK(std::abs(d.lambda[0]) == 0.0);
  auto bad = b;
  bad.lambda[4] *= 2.0;
  CHECK_THROWS_AS(validate_class(bad, T), Error);
  CHECK_THROWS_AS(named_target("nope", T, 1, 1, 10), Error);
  auto rt = TargetSequence::from_json(b.to_json());
  CHECK(std::abs(rt.lambda[7] - b.lambda[7]) == 0.0);
}

TEST_CASE("random members are seeded and in the class") {
  WeightMatrix T(power(0.5));
  auto a = random_class_member(T, 1.0, 1.0, 12, 42), b = random_class_member(T, 1.0, 1.0, 12, 42);
  CHECK(a.lambda == b.lambda);
  CHECK_NOTHROW(validate_class(a, T));
}

TEST_CASE("precision mapping") {
  WeightMatrix T(power(0.5));
  auto t = named_target("delta0", T, 1.0, 1.0, 24);
  ExtensionOptions o;
  o.precision = 200;
  CHECK_THROWS_AS(build_extension(t, power(0.5), 0.5, o), Error);
}

TEST_CASE("delta0 extension tends to lambda_0 and inverts the Borel map") {
  auto tau = from_sequence(gevrey_source(1.0));
  WeightMatrix T(tau);
  auto t = named_target("delta0", T, 1.0, 1.0, 24);
  for (int prec : {53, 113}) {
    ExtensionOptions o;
    o.precision = prec;
    auto m = build_extension(t, tau, 0.5, o);
    CHECK(m.precision() == prec);
    auto b = m.borel_coeffs();
    CHECK(std::abs(b[0] - t.lambda[0] / m.moments()[0]) < 1e-12 * std::abs(b[0]));
    auto f = m.eval_f({1e-3, 0.0});
    CHECK(std::abs(f - t.lambda[0]) < 1e-2 * std::abs(t.lambda[0]));
    // binary64 loses p >= 3 to cancellation in p! R_p(r) / r^p
    CHECK(borel_check(m, prec == 53 ? 2 : 4).passed);
  }
}

}
