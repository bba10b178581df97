#include <doctest.h>

#include <cmath>

#include "ultraholo/indices.hpp"
#include "ultraholo/sources.hpp"

using namespace uh;

TEST_SUITE("indices") {

TEST_CASE("gamma of powers") {
  for (double a : {0.25, 0.5, 0.75}) CHECK(gamma_fn(power(a)).value == doctest::Approx(1 / a).epsilon(0.05 * a));
}

TEST_CASE("gamma of gevrey sequences") {
  for (double s : {1.0, 2.0, 3.0}) {
    CHECK(gamma_seq(gevrey(s, 400)).value == doctest::Approx(s).epsilon(0.05 / s));
    CHECK(gamma_fn(from_sequence(gevrey_source(s))).value == doctest::Approx(s).epsilon(0.05 / s));
  }
}

TEST_CASE("log-type weights have infinite index") {
  CHECK(std::isinf(gamma_fn(log_power(2.0)).value));
}

TEST_CASE("ramification scales the index") {
  auto w = from_sequence(gevrey_source(1.0));
  CHECK(std::fabs(gamma_fn(ramified(w, 0.5)).value - 2 * gamma_fn(w).value) < 0.1);
  CHECK(std::fabs(gamma_fn(ramified(power(0.5), 2.0)).value - 0.5 * gamma_fn(power(0.5)).value) < 0.1);
}

TEST_CASE("identities") {
  CHECK(check_index_identities(power(0.5)).all_agree());
  auto M = gevrey(2.0, 400);
  auto rep = check_index_identities(M, gevrey_source(1.0), gevrey_source(2.0));
  CHECK(rep.all_agree());
  CHECK(rep.rows.size() == 3);
}

}
