#include <random>

#include "doctest.h"
#include "nspinn/lcp.hpp"
#include "oracles.hpp"

using namespace nspinn;

namespace {

LcpProblem table_problem() {
  LcpProblem p;
  p.A.resize(2, 2);
  p.A << 1, -1, -1, 0;
  p.b.resize(2);
  p.b << -0.009, 0.02;
  return p;
}

}  // namespace

TEST_CASE("pivoting solves the 2x2 reference problem") {
  const auto s = solve_pivoting(table_problem());
  REQUIRE(s.status == LcpStatus::solved);
  // Enumerated by hand: basis {x1}, x1 = 0.009, y2 = 0.02 - 0.009.
  CHECK(s.x(0) == doctest::Approx(0.009).epsilon(1e-12));
  CHECK(s.x(1) == doctest::Approx(0.0));
  CHECK(s.y(0) == doctest::Approx(0.0));
  CHECK(s.y(1) == doctest::Approx(0.011).epsilon(1e-12));
  CHECK(s.residual <= 1e-20);
}

TEST_CASE("trivial problem b >= 0 needs no pivot") {
  LcpProblem p{Mat::Identity(3, 3), Vec::Constant(3, 2.0)};
  const auto s = solve_pivoting(p);
  CHECK(s.status == LcpStatus::solved);
  CHECK(s.iterations == 0);
  CHECK(s.x.isZero());
  CHECK(s.y.isApprox(p.b));
}

TEST_CASE("pivoting matches the enumeration oracle on random PD problems") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 300; ++t) {
    const int n = 1 + t % 6;
    const auto p = oracle::random_pd_lcp(rng, n);
    const auto ref = oracle::lcp_enumerate(p.A, p.b);
    REQUIRE(ref);
    const auto s = solve_pivoting(p);
    REQUIRE(s.status == LcpStatus::solved);
    CHECK((s.x - ref->first).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(satisfies_lcp(p, s.x, s.y, 1e-9));
  }
}

TEST_CASE("degenerate problem terminates via the lexicographic rule") {
  // b has ties, so a plain min-ratio test can cycle.
  LcpProblem p;
  p.A = Mat::Identity(3, 3) + Mat::Ones(3, 3);
  p.b = Vec::Constant(3, -1.0);
  const auto s = solve_pivoting(p);
  REQUIRE(s.status == LcpStatus::solved);
  const auto ref = oracle::lcp_enumerate(p.A, p.b);
  REQUIRE(ref);
  CHECK((s.x - ref->first).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("infeasible problem ends in ray termination") {
  LcpProblem p{Mat::Constant(1, 1, -1.0), Vec::Constant(1, -1.0)};
  const auto s = solve_pivoting(p);
  CHECK(s.status == LcpStatus::ray_termination);
}

TEST_CASE("malformed input is rejected") {
  LcpProblem p{Mat::Identity(2, 2), Vec::Ones(3)};
  CHECK_FALSE(p.well_formed());
  CHECK_THROWS_AS(solve_pivoting(p), std::invalid_argument);
  LcpProblem q{Mat::Identity(2, 2), Vec::Ones(2)};
  q.b(1) = std::nan("");
  CHECK_THROWS_AS(solve_pivoting(q), std::invalid_argument);
}

TEST_CASE("residual is zero exactly at a solution and positive off it") {
  const auto p = table_problem();
  Vec x(2), y(2);
  x << 0.009, 0.0;
  y << 0.0, 0.011;
  CHECK(lcp_residual(p, x, y) <= 1e-30);
  x(1) = 0.1;
  CHECK(lcp_residual(p, x, y) > 0.0);
}

TEST_CASE("property: scaling A and b by s > 0 leaves x unchanged") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    auto p = oracle::random_pd_lcp(rng, 4);
    const auto s1 = solve_pivoting(p);
    p.A *= 37.0;
    p.b *= 37.0;
    const auto s2 = solve_pivoting(p);
    CHECK((s1.x - s2.x).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("one row scaled by 1e8 does not hide the pivots of the others") {
  // A spring-contact step LCP at dt = 1e-4.
  LcpProblem p;
  p.A.resize(3, 3);
  p.A << 100000100, 0, 0, -0.24, 0.2, 1, 2.4, -1, 0;
  p.b.resize(3);
  p.b << -443018.94890599512, 0.00096804885414427267, 0;
  const auto s = solve_pivoting(p);
  REQUIRE(s.status == LcpStatus::solved);
  const auto ref = oracle::lcp_enumerate(p.A, p.b);
  REQUIRE(ref);
  CHECK((s.x - ref->first).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + ref->first.cwiseAbs().maxCoeff()));
  CHECK((p.A * s.x + p.b - s.y).cwiseAbs().maxCoeff() <= 1e-9 * p.b.cwiseAbs().maxCoeff());
}
