#include <random>

#include "doctest.h"
#include "nspinn/lcp_pinn.hpp"
#include "oracles.hpp"

using namespace nspinn;

TEST_CASE("scaling round-trips the complementarity pattern") {
  std::mt19937_64 rng(5);
  auto p = oracle::random_pd_lcp(rng, 3);
  p.A.row(1) *= 1e4;
  p.b(1) *= 1e4;
  const auto sc = LcpScaling::compute(p, true);
  const auto ps = sc.apply(p);
  const auto ss = solve_pivoting(ps);
  REQUIRE(ss.status == LcpStatus::solved);
  Vec x, y;
  sc.map(ss.x, ss.y, x, y);
  const auto ref = oracle::lcp_enumerate(p.A, p.b);
  REQUIRE(ref);
  CHECK((x - ref->first).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, ref->first.cwiseAbs().maxCoeff()));
}

TEST_CASE("network starts with every output in the active region") {
  LcpPinnConfig cfg;
  const Fnn net = make_lcp_net(4, cfg, 3);
  CHECK(net.output_size() == 8);
  CHECK(net.output_activation().has_value());
  const Vec out = forward(net, Vec::Ones(4));
  for (int i = 0; i < out.size(); ++i) CHECK(out(i) > 0.0);
}

TEST_CASE("PINN solves the 2x2 reference problem") {
  LcpProblem p;
  p.A.resize(2, 2);
  p.A << 1, -1, -1, 0;
  p.b.resize(2);
  p.b << -0.009, 0.02;
  const auto r = solve_lcp_pinn_detailed(p, {});
  REQUIRE(r.solution.status == LcpStatus::solved);
  CHECK(std::abs(r.solution.x(0) - 0.009) <= 1e-6);
  CHECK(std::abs(r.solution.x(1)) <= 1e-6);
  CHECK(std::abs(r.solution.y(1) - 0.011) <= 1e-6);
  CHECK(r.report.final_loss <= 1e-8);
}

TEST_CASE("warm start from a converged net reuses it") {
  LcpProblem p;
  p.A = Mat::Identity(2, 2) * 2.0;
  p.b = Vec::Constant(2, -1.0);
  const auto r1 = solve_lcp_pinn_detailed(p, {});
  REQUIRE(r1.solution.status == LcpStatus::solved);
  p.b(0) = -1.01;
  const auto r2 = solve_lcp_pinn_detailed(p, {}, &r1.net);
  REQUIRE(r2.solution.status == LcpStatus::solved);
  CHECK(r2.warm_start_used);
  CHECK(r2.solution.x(0) == doctest::Approx(0.505).epsilon(1e-6));
}

TEST_CASE("random PD problems agree with the enumeration oracle") {
  std::mt19937_64 rng(99);
  int agree = 0;
  const int total = 40;
  for (int t = 0; t < total; ++t) {
    const auto p = oracle::random_pd_lcp(rng, 1 + t % 4);
    const auto ref = oracle::lcp_enumerate(p.A, p.b);
    REQUIRE(ref);
    LcpPinnConfig cfg;
    cfg.seed = 1 + t;
    const auto s = solve_lcp_pinn(p, cfg);
    if (s.status == LcpStatus::solved && (s.x - ref->first).cwiseAbs().maxCoeff() <= 1e-4) ++agree;
  }
  CHECK(agree >= total * 95 / 100);
}

TEST_CASE("same seed gives the same answer") {
  std::mt19937_64 rng(4);
  const auto p = oracle::random_pd_lcp(rng, 3);
  const auto a = solve_lcp_pinn(p, {});
  const auto b = solve_lcp_pinn(p, {});
  CHECK(a.x == b.x);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("polishing the trained basis recovers the exact solution") {
  std::mt19937_64 rng(21);
  int polished = 0;
  for (int t = 0; t < 20; ++t) {
    const auto p = oracle::random_pd_lcp(rng, 3);
    const auto ref = oracle::lcp_enumerate(p.A, p.b);
    REQUIRE(ref);
    const auto r = solve_lcp_pinn_detailed(p, {});
    REQUIRE(r.solution.status == LcpStatus::solved);
    polished += r.polished;
    if (r.polished) {
      CHECK((r.solution.x - ref->first).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(r.solution.x.cwiseProduct(r.solution.y).cwiseAbs().maxCoeff() == 0.0);
    }
    LcpPinnConfig raw;
    raw.polish = false;
    const auto u = solve_lcp_pinn_detailed(p, raw);
    CHECK_FALSE(u.polished);
    CHECK((u.solution.x - ref->first).cwiseAbs().maxCoeff() <= 1e-4);
  }
  CHECK(polished > 0);
}

TEST_CASE("polishing handles a separated contact with a singular x > y basis") {
  // Tangential rows of a spring-contact step while the gap is open: Lambda_N =
  // Lambda_L = 0 and gamma_R = 1, with y_2 = y_3 = 0 as well.
  LcpProblem p;
  p.A.resize(3, 3);
  p.A << 1, -2.5e-8, 0, -8e-4, 0.2, 1, 8e-3, -1, 0;
  p.b.resize(3);
  p.b << 0.0165, -1, 0;
  const auto r = solve_lcp_pinn_detailed(p, {});
  REQUIRE(r.solution.status == LcpStatus::solved);
  CHECK(r.polished);
  CHECK(r.solution.x(0) == 0.0);
  CHECK(r.solution.x(1) == 0.0);
  CHECK(r.solution.x(2) == doctest::Approx(1.0).epsilon(1e-14));
  // Same rows with a continuum of solutions gamma_R >= 0.89; any of them is
  // exact once polished, and the impulses stay zero.
  p.b << 1, -0.89262199907154316, 0;
  const auto s = solve_lcp_pinn_detailed(p, {});
  REQUIRE(s.solution.status == LcpStatus::solved);
  CHECK(s.polished);
  CHECK(s.solution.x(0) == 0.0);
  CHECK(s.solution.x(1) == 0.0);
  CHECK(satisfies_lcp(p, s.solution.x, s.solution.y, 1e-15));
  // Open gap with b_2 > 0: x = 0 is exact, reached by dropping gamma_R.
  p.b << 1, 0.01041757456042834, 0;
  const auto t = solve_lcp_pinn_detailed(p, {});
  REQUIRE(t.solution.status == LcpStatus::solved);
  CHECK(t.solution.x(0) == 0.0);
  CHECK(t.solution.x(1) <= 1e-16);
  CHECK(satisfies_lcp(p, t.solution.x, t.solution.y, 1e-15));
}
