#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "cyclesync/dtw.hpp"
#include "cyclesync/errors.hpp"
#include "cyclesync/rng.hpp"
#include "oracles.hpp"

using cyclesync::dtw_exact;
using cyclesync::fastdtw;
using cyclesync::FastDtwConfig;
using cyclesync::PathPair;
using cyclesync::PathViolationKind;
using cyclesync::validate_path;
using cyclesync::WarpPath;

namespace {

std::vector<double> random_series(std::mt19937_64& rng, std::size_t len,
                                  double lo = -5.0, double hi = 5.0) {
  std::vector<double> s(len);
  for (double& v : s) v = cyclesync::uniform(rng, lo, hi);
  return s;
}

std::vector<double> random_int_series(std::mt19937_64& rng, std::size_t len) {
  std::vector<double> s(len);
  for (double& v : s) {
    v = static_cast<double>(cyclesync::uniform_index(rng, 10));
  }
  return s;
}

std::vector<double> random_walk(std::mt19937_64& rng, std::size_t len) {
  std::vector<double> s(len);
  double x = 0.0;
  for (double& v : s) {
    x += cyclesync::uniform(rng, -1.0, 1.0);
    v = x;
  }
  return s;
}

bool has_kind(const std::vector<cyclesync::PathViolation>& vs,
              PathViolationKind kind) {
  return std::any_of(vs.begin(), vs.end(),
                     [&](const auto& v) { return v.kind == kind; });
}

}  // namespace

TEST_CASE("identity alignment is the diagonal with zero cost") {
  std::mt19937_64 rng(11);
  const std::vector<double> s = random_series(rng, 23);
  const WarpPath p = dtw_exact(s, s);
  CHECK(p.cost == 0.0);
  REQUIRE(p.pairs.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(p.pairs[i] == PathPair{static_cast<int>(i), static_cast<int>(i)});
  }
}

TEST_CASE("alignment of [0,1,2] against [0,1,1,2]") {
  const std::vector<double> r = {0, 1, 2};
  const std::vector<double> s = {0, 1, 1, 2};
  const WarpPath p = dtw_exact(r, s);
  CHECK(p.cost == 0.0);
  const std::vector<PathPair> want = {{0, 0}, {1, 1}, {1, 2}, {2, 3}};
  CHECK(p.pairs == want);
}

TEST_CASE("single-point reference aligns to every sample index") {
  const std::vector<double> r = {5};
  const std::vector<double> s = {1, 2, 3};
  const WarpPath p = dtw_exact(r, s);
  CHECK(p.cost == 9.0);
  const std::vector<PathPair> want = {{0, 0}, {0, 1}, {0, 2}};
  CHECK(p.pairs == want);
}

TEST_CASE("backtrace tie-break on constant series gives the documented path") {
  const std::vector<double> r(5, 1.0);
  const std::vector<double> s(3, 1.0);
  const WarpPath p = dtw_exact(r, s);
  CHECK(p.cost == 0.0);
  const std::vector<PathPair> want = {{0, 0}, {1, 0}, {2, 0}, {3, 1}, {4, 2}};
  CHECK(p.pairs == want);
}

TEST_CASE("the memoized oracle agrees with exhaustive enumeration") {
  std::mt19937_64 rng(17);
  for (int it = 0; it < 50; ++it) {
    const std::size_t m = 1 + cyclesync::uniform_index(rng, 5);
    const std::size_t n = 1 + cyclesync::uniform_index(rng, 5);
    const auto a = random_series(rng, m);
    const auto b = random_series(rng, n);
    CHECK(oracle::dtw_cost(a, b) ==
          doctest::Approx(oracle::dtw_cost_enumerated(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("exact cost matches the memoized oracle on integer series") {
  std::mt19937_64 rng(19);
  for (int it = 0; it < 200; ++it) {
    const std::size_t m = 1 + cyclesync::uniform_index(rng, 8);
    const std::size_t n = 1 + cyclesync::uniform_index(rng, 8);
    const auto a = random_int_series(rng, m);
    const auto b = random_int_series(rng, n);
    CHECK(dtw_exact(a, b).cost == oracle::dtw_cost(a, b));
  }
}

TEST_CASE("exact path matches the oracle's tie-broken backtrace") {
  std::mt19937_64 rng(23);
  for (int it = 0; it < 100; ++it) {
    const std::size_t m = 1 + cyclesync::uniform_index(rng, 12);
    const std::size_t n = 1 + cyclesync::uniform_index(rng, 12);
    const auto a = random_int_series(rng, m);
    const auto b = random_int_series(rng, n);
    const WarpPath p = dtw_exact(a, b);
    const auto want = oracle::dtw_path(a, b);
    REQUIRE(p.pairs.size() == want.size());
    for (std::size_t k = 0; k < want.size(); ++k) {
      CHECK(p.pairs[k].ref == static_cast<int>(want[k].first));
      CHECK(p.pairs[k].sample == static_cast<int>(want[k].second));
    }
  }
}

TEST_CASE("cost is symmetric in its arguments") {
  std::mt19937_64 rng(29);
  for (int it = 0; it < 40; ++it) {
    const auto a = random_series(rng, 1 + cyclesync::uniform_index(rng, 40));
    const auto b = random_series(rng, 1 + cyclesync::uniform_index(rng, 40));
    CHECK(dtw_exact(a, b).cost == doctest::Approx(dtw_exact(b, a).cost).epsilon(1e-12));
  }
}

TEST_CASE("exact paths always validate") {
  std::mt19937_64 rng(31);
  for (int it = 0; it < 60; ++it) {
    const std::size_t m = 1 + cyclesync::uniform_index(rng, 64);
    const std::size_t n = 1 + cyclesync::uniform_index(rng, 64);
    const auto a = random_series(rng, m);
    const auto b = random_series(rng, n);
    CHECK(validate_path(dtw_exact(a, b), m, n).empty());
  }
}

TEST_CASE("empty and non-finite inputs are rejected") {
  const std::vector<double> empty;
  const std::vector<double> ok = {1.0, 2.0};
  const std::vector<double> bad = {1.0, std::nan("")};
  CHECK_THROWS_WITH_AS(dtw_exact(empty, ok), doctest::Contains("empty"),
                       cyclesync::Error);
  CHECK_THROWS_AS(dtw_exact(ok, bad), cyclesync::Error);
  try {
    dtw_exact(bad, ok);
    FAIL("expected a throw");
  } catch (const cyclesync::Error& e) {
    CHECK(e.code() == cyclesync::errc::non_finite_value);
  }
}

TEST_CASE("validate_path reports each violation category") {
  SUBCASE("diagonal path is clean") {
    WarpPath p;
    for (int i = 0; i < 4; ++i) p.pairs.push_back({i, i});
    CHECK(validate_path(p, 4, 4).empty());
  }
  SUBCASE("missing the (0,0) start") {
    WarpPath p;
    p.pairs = {{1, 0}, {1, 1}, {2, 2}, {3, 3}};
    CHECK(has_kind(validate_path(p, 4, 4), PathViolationKind::boundary));
  }
  SUBCASE("a (+2,+1) jump breaks continuity") {
    WarpPath p;
    p.pairs = {{0, 0}, {2, 1}, {3, 2}, {3, 3}};
    CHECK(has_kind(validate_path(p, 4, 4), PathViolationKind::continuity));
  }
  SUBCASE("a backward step breaks monotonicity") {
    WarpPath p;
    p.pairs = {{0, 0}, {1, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 3}};
    CHECK(has_kind(validate_path(p, 4, 4), PathViolationKind::monotonicity));
  }
  SUBCASE("too short a path trips the length bound and coverage") {
    WarpPath p;
    p.pairs = {{0, 0}, {1, 1}};
    const auto vs = validate_path(p, 4, 4);
    CHECK(has_kind(vs, PathViolationKind::length));
    CHECK(has_kind(vs, PathViolationKind::coverage));
  }
  SUBCASE("skipping a sample index is a coverage violation") {
    WarpPath p;
    p.pairs = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    CHECK(has_kind(validate_path(p, 4, 5), PathViolationKind::coverage));
  }
}

TEST_CASE("fastdtw keeps the identity diagonal at any radius") {
  std::mt19937_64 rng(37);
  const auto s = random_walk(rng, 300);
  for (int radius : {0, 1, 10}) {
    FastDtwConfig cfg;
    cfg.radius = radius;
    const WarpPath p = fastdtw(s, s, cfg);
    CHECK(p.cost == 0.0);
    CHECK(p.pairs.size() == s.size());
    CHECK(validate_path(p, s.size(), s.size()).empty());
  }
}

TEST_CASE("fastdtw equals exact DP once the radius covers the grid") {
  std::mt19937_64 rng(41);
  for (int it = 0; it < 30; ++it) {
    const std::size_t m = 1 + cyclesync::uniform_index(rng, 64);
    const std::size_t n = 1 + cyclesync::uniform_index(rng, 64);
    const auto a = random_series(rng, m);
    const auto b = random_series(rng, n);
    FastDtwConfig cfg;
    cfg.radius = static_cast<int>(std::max(m, n));
    CHECK(fastdtw(a, b, cfg).cost ==
          doctest::Approx(dtw_exact(a, b).cost).epsilon(1e-12));
  }
}

TEST_CASE("fastdtw cost never undercuts the exact optimum") {
  std::mt19937_64 rng(43);
  for (int it = 0; it < 40; ++it) {
    const std::size_t m = 2 + cyclesync::uniform_index(rng, 127);
    const std::size_t n = 2 + cyclesync::uniform_index(rng, 127);
    const auto a = random_walk(rng, m);
    const auto b = random_walk(rng, n);
    for (int radius : {0, 1, 10}) {
      FastDtwConfig cfg;
      cfg.radius = radius;
      const WarpPath p = fastdtw(a, b, cfg);
      CHECK(validate_path(p, m, n).empty());
      CHECK(p.cost >= dtw_exact(a, b).cost - 1e-9);
    }
  }
}

TEST_CASE("fastdtw paths on long random walks stay valid") {
  std::mt19937_64 rng(47);
  const auto a = random_walk(rng, 1000);
  const auto b = random_walk(rng, 1000);
  FastDtwConfig cfg;
  cfg.radius = 1;
  const WarpPath p = fastdtw(a, b, cfg);
  CHECK(validate_path(p, a.size(), b.size()).empty());
}

// Both bounds below are seeded regression guards on this corpus, not
// theorems about the algorithm.
TEST_CASE("radius-10 cost inflation stays small on a random-walk corpus") {
  std::mt19937_64 rng(53);
  for (int it = 0; it < 15; ++it) {
    const std::size_t m = 32 + cyclesync::uniform_index(rng, 225);
    const std::size_t n = 32 + cyclesync::uniform_index(rng, 225);
    const auto a = random_walk(rng, m);
    const auto b = random_walk(rng, n);
    FastDtwConfig cfg;
    cfg.radius = 10;
    const double exact = dtw_exact(a, b).cost;
    const double approx = fastdtw(a, b, cfg).cost;
    CHECK(approx <= exact * 1.05 + 1e-9);
  }
}

// Strict per-step monotonicity in the radius does not hold: the corridor is
// derived from the coarse-level path, and a wider radius can pick a
// different coarse route whose projected corridor excludes the previously
// found one (seed 59, pair 8 below regresses from radius 1 to 2 by 0.3).
// Assert the coarse-to-fine trend instead.
TEST_CASE("a generous radius converges toward the exact cost on the corpus") {
  std::mt19937_64 rng(59);
  for (int it = 0; it < 10; ++it) {
    const std::size_t m = 32 + cyclesync::uniform_index(rng, 193);
    const std::size_t n = 32 + cyclesync::uniform_index(rng, 193);
    const auto a = random_walk(rng, m);
    const auto b = random_walk(rng, n);
    const double exact = dtw_exact(a, b).cost;
    double first = 0.0;
    double last = 0.0;
    for (int radius : {0, 1, 2, 5, 10, 20}) {
      FastDtwConfig cfg;
      cfg.radius = radius;
      const double cost = fastdtw(a, b, cfg).cost;
      CHECK(cost >= exact - 1e-9);
      if (radius == 0) first = cost;
      last = cost;
    }
    CHECK(last <= first + 1e-9);
    CHECK(last <= exact * 1.05 + 1e-9);
  }
}

TEST_CASE("fastdtw rejects a negative radius and tiny min_size") {
  const std::vector<double> s = {1.0, 2.0, 3.0};
  FastDtwConfig bad_radius;
  bad_radius.radius = -1;
  CHECK_THROWS_AS(fastdtw(s, s, bad_radius), cyclesync::Error);
  FastDtwConfig bad_floor;
  bad_floor.min_size = 1;
  CHECK_THROWS_AS(fastdtw(s, s, bad_floor), cyclesync::Error);
}
