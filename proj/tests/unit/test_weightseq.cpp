#include <doctest.h>

#include <cmath>
#include <random>

#include "ultraholo/sources.hpp"
#include "ultraholo/weightfn.hpp"
#include "ultraholo/weightseq.hpp"

using namespace uh;

TEST_SUITE("weightseq") {

TEST_CASE("gevrey terms and quotients") {
  auto M = gevrey(2.0, 50);
  CHECK(M.horizon() == 50);
  CHECK(M.log_term(0) == 0.0);
  double lf = 0;
  for (int p = 1; p <= 50; ++p) {
    lf += std::log(double(p));
    CHECK(M.log_term(p) == doctest::Approx(2 * lf).epsilon(1e-13));
  }
  auto q = quotients(M);
  for (int p = 1; p <= 50; ++p) CHECK(q.log_mu[p] == doctest::Approx(2 * std::log(double(p))).epsilon(1e-12));
}

TEST_CASE("factorial division and multiplication are inverse") {
  auto M = gevrey(2.0, 40);
  auto m = divide_by_factorials(M);
  auto g1 = gevrey(1.0, 40);
  for (int p = 0; p <= 40; ++p) CHECK(m.log_term(p) == doctest::Approx(g1.log_term(p)).epsilon(1e-12));
  auto back = multiply_by_factorials(m);
  for (int p = 0; p <= 40; ++p) CHECK(back.log_term(p) == doctest::Approx(M.log_term(p)).epsilon(1e-12));
}

TEST_CASE("log-convex minorant is the lower hull") {
  // hull of (0,0),(1,2),(2,1),(3,3) passes through (0,0),(2,1),(3,3)
  WeightSequence M({0.0, 2.0, 1.0, 3.0}, "bumpy");
  auto L = log_convex_minorant(M);
  CHECK(L.log_term(0) == doctest::Approx(0.0));
  CHECK(L.log_term(1) == doctest::Approx(0.5));
  CHECK(L.log_term(2) == doctest::Approx(1.0));
  CHECK(L.log_term(3) == doctest::Approx(3.0));
  CHECK(predicate(M, "lc").verdict == Verdict::FailsAtIndex);
  CHECK(predicate(L, "lc").verdict == Verdict::HoldsOnHorizon);
}

TEST_CASE("predicates on gevrey and q-gevrey") {
  auto M = gevrey(2.0, 200);
  CHECK(holds(predicate(M, "lc").verdict));
  CHECK(holds(predicate(M, "slc").verdict));
  CHECK(holds(predicate(M, "mg").verdict));
  // log M_p = p^2 violates moderate growth
  std::vector<double> v(201);
  for (int p = 0; p <= 200; ++p) v[p] = double(p) * p;
  auto Q = WeightSequence(v, "q-gevrey");
  CHECK(predicate(Q, "mg").verdict == Verdict::TrendDiverges);
  CHECK(trend_diverges(1, 2, 4));
  CHECK_FALSE(trend_diverges(1, 1.5, 1.5));
}

TEST_CASE("relations") {
  auto A = gevrey(1.0, 100), B = gevrey(2.0, 100);
  auto r = relation(A, B);
  CHECK(r.le);
  CHECK_FALSE(r.approx);
  // 2^p M is equivalent to M in both senses
  std::vector<double> v(101);
  for (int p = 0; p <= 100; ++p) v[p] = A.log_term(p) + p * std::log(2.0);
  auto r2 = relation(A, WeightSequence(v));
  CHECK(r2.approx);
  CHECK(r2.simeq);
  CHECK(r2.headline == "≃");
}

TEST_CASE("omega_M binary search against brute force") {
  std::mt19937_64 rng(7);
  for (auto M : {gevrey(1.0, 400), gevrey(2.0, 400), pathological_source()->materialize(400)}) {
    // stay below the last quotient so the argmax is inside the table
    std::uniform_real_distribution<double> U(-3.0, quotients(M).log_mu.back() - 1e-9);
    for (int i = 0; i < 200; ++i) {
      double t = std::exp(U(rng));
      std::size_t arg = 0;
      double brute = omega_M_bruteforce(M, t, &arg);
      CHECK(omega_M(M, t) == doctest::Approx(brute).epsilon(1e-12));
    }
  }
}

TEST_CASE("pathological anchors") {
  auto a = default_pathological_seed();
  CHECK_NOTHROW(validate_pathological_anchors(a));
  CHECK_THROWS_AS(validate_pathological_anchors({2, 3, 4}), Error);
  auto ext = pathological_anchors(a, 100000);
  CHECK(ext.back() >= 100000);
  CHECK_NOTHROW(validate_pathological_anchors(ext));
  // exponent is linear between anchors and f(a_1) = a_1 * slope_0
  double f1 = pathological_f(ext, double(ext[1])), f2 = pathological_f(ext, double(ext[2]));
  double mid = pathological_f(ext, 0.5 * double(ext[1] + ext[2]));
  CHECK(mid == doctest::Approx(0.5 * (f1 + f2)).epsilon(1e-12));
  auto m = pathological_source()->materialize(300);
  CHECK(predicate(m, "lc").verdict == Verdict::HoldsOnHorizon);
}

TEST_CASE("serialization round trips") {
  auto M = gevrey(1.5, 30);
  auto j = WeightSequence::from_json(M.to_json());
  auto c = WeightSequence::from_csv(M.to_csv());
  for (int p = 0; p <= 30; ++p) {
    CHECK(j.log_term(p) == M.log_term(p));
    CHECK(c.log_term(p) == M.log_term(p));
  }
  auto s = source_from_json(gevrey_source(1.5)->to_json());
  CHECK(s->log_term(17) == doctest::Approx(1.5 * std::lgamma(18.0)).epsilon(1e-13));
}

TEST_CASE("sources") {
  auto g = gevrey_source(1.0);
  CHECK(g->horizon() == kClosedFormHorizon);
  // index_for: largest p with log mu_p <= log t, mu_p = p
  CHECK(g->index_for(std::log(10.5)) == 10);
  auto f = factorial_shift_source(gevrey_source(1.0), 1.0);
  CHECK(f->log_term(9) == doctest::Approx(2 * std::lgamma(10.0)).epsilon(1e-13));
}

}
