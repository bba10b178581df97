#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ultraholo/checks.hpp"
#include "ultraholo/parallel.hpp"

using namespace uh;

namespace {
CheckEntry entry(std::string id, std::string anchor, Strategy s, bool pass) {
  return {std::move(id), std::move(anchor), s, [pass](const CheckContext&) {
            CheckOutcome o;
            o.passed = pass;
            o.stable = pass;
            BoundFit f;
            f.id = "fit";
            f.columns = {"x", "y"};
            f.rows = {{1.0, 0.1}, {2.0, 1.0 / 3.0}};
            o.fits.push_back(f);
            return o;
          }};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}
}  // namespace

TEST_SUITE("checks") {

TEST_CASE("registry refuses unanchored and duplicate entries") {
  Registry r;
  CHECK_THROWS_AS(r.add(entry("a", "", Strategy::Exact, true)), Error);
  r.add(entry("a", "x <= y", Strategy::Exact, true));
  CHECK_THROWS_AS(r.add(entry("a", "x <= y", Strategy::Exact, true)), Error);
  CHECK_THROWS_AS(r.find("b"), Error);
  try {
    r.add(entry("z", "", Strategy::Fitted, true));
  } catch (const Error& e) {
    CHECK(e.code() == "unanchored-entry");
  }
}

TEST_CASE("only exact failures are hard") {
  Registry r;
  r.add(entry("exact-ok", "a", Strategy::Exact, true));
  r.add(entry("fitted-bad", "b", Strategy::Fitted, false));
  r.add(entry("throws", "c", Strategy::Tolerance, true));
  r.add({"exact-err", "d", Strategy::Exact, [](const CheckContext&) -> CheckOutcome {
           throw Error("horizon-exhausted", "boom");
         }});
  CheckContext ctx;
  auto rep = r.run({"exact-ok", "fitted-bad"}, ctx);
  CHECK(rep.exact_ok());
  CHECK_FALSE(rep.fitted_stable());
  auto rep2 = r.run_all(ctx);
  REQUIRE(rep2.results.size() == 4);
  CHECK(rep2.results[3].error.find("horizon-exhausted") != std::string::npos);
  CHECK(rep2.results[3].hard_failure());
  CHECK_FALSE(rep2.exact_ok());
}

TEST_CASE("bundles are deterministic without metadata") {
  Registry r;
  r.add(entry("one", "a", Strategy::Exact, true));
  r.add(entry("two", "b, \"quoted\"", Strategy::Fitted, true));
  CheckContext ctx;
  namespace fs = std::filesystem;
  auto base = fs::temp_directory_path() / "ultraholo_unit_bundle";
  fs::remove_all(base);
  r.run_all(ctx).write_bundle((base / "a").string(), ctx, false);
  r.run_all(ctx).write_bundle((base / "b").string(), ctx, false);
  for (auto name : {"index.json", "summary.json", "summary.txt", "one.csv", "two.csv"}) {
    auto x = slurp(base / "a" / name), y = slurp(base / "b" / name);
    CHECK(!x.empty());
    CHECK(x == y);
  }
  CHECK(slurp(base / "a" / "one.csv").rfind("part,", 0) == 0);
  fs::remove_all(base);
}

TEST_CASE("default registry entries are anchored and unique") {
  const auto& reg = default_registry();
  CHECK(reg.entries().size() >= 20);
  for (auto& e : reg.entries()) CHECK(!e.anchor.empty());
  CHECK_NOTHROW(reg.find("mg-across-levels"));
}

TEST_CASE("real check csv is reproducible") {
  CheckContext ctx;
  const auto& reg = default_registry();
  auto a = reg.run({"mg-across-levels", "h-omega-identity"}, ctx);
  auto b = reg.run({"mg-across-levels", "h-omega-identity"}, ctx);
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    CHECK(a.results[i].passed);
    CHECK(a.results[i].to_csv() == b.results[i].to_csv());
  }
}

TEST_CASE("context json round trip") {
  CheckContext c;
  c.gamma = 0.25;
  c.target = "delta1";
  c.omega = power(0.25);
  auto j = c.to_json();
  auto d = CheckContext::from_json(j);
  CHECK(d.to_json() == j);
  auto bad = j;
  bad["version"] = 9;
  CHECK_THROWS_AS(CheckContext::from_json(bad), Error);
}

TEST_CASE("parallel_for") {
  std::vector<int> out(100, 0);
  parallel_for(out.size(), [&](std::size_t i) { out[i] = int(i) * 2; });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == int(i) * 2);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 3) throw Error("x", "y");
                  }),
                  Error);
  setenv("ULTRAHOLO_THREADS", "3", 1);
  CHECK(thread_count() == 3);
  unsetenv("ULTRAHOLO_THREADS");
  CHECK(thread_count() >= 1);
}

}
