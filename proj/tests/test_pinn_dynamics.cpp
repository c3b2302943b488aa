#include <cmath>

#include "doctest.h"
#include "nspinn/pinn_dynamics.hpp"
#include "oracles.hpp"

using namespace nspinn;

namespace {

// First-order Gauss collocation of y' = L y + g_k on y = [q, u], solved as one
// dense stage system. Independent of the velocity-only operator under test.
void gauss_step(const MechModel& m, const ButcherTableau& t, double dt, const Vec& q, const Vec& u,
                const StageForces& f, Vec& qE, Vec& uE) {
  const int n = m.n_dof(), R = t.order, N = 2 * n;
  const Mat Minv = m.M.inverse();
  Mat L = Mat::Zero(N, N);
  L.block(0, n, n, n) = Mat::Identity(n, n);
  L.block(n, 0, n, n) = -Minv * m.Ks;
  L.block(n, n, n, n) = -Minv * m.Cs;
  Vec y(N);
  y << q, u;
  std::vector<Vec> g(R, Vec::Zero(N));
  for (int k = 0; k < R; ++k)
    g[k].tail(n) = Minv * (m.f_e + m.W_N * f.lambda_N.col(k) + m.W_T * f.lambda_T.col(k));
  // Unknown stage derivatives K_k = L Y_k + g_k, Y_k = y + dt sum a_kj K_j.
  Mat S = Mat::Identity(N * R, N * R);
  Vec rhs(N * R);
  for (int k = 0; k < R; ++k) {
    for (int j = 0; j < R; ++j) S.block(k * N, j * N, N, N) -= dt * t.a(k, j) * L;
    rhs.segment(k * N, N) = L * y + g[k];
  }
  const Vec K = S.partialPivLu().solve(rhs);
  Vec yE = y;
  for (int k = 0; k < R; ++k) yE += dt * t.b(k) * K.segment(k * N, N);
  qE = yE.head(n);
  uE = yE.tail(n);
}

SystemState model2_state() {
  const auto m = model_two();
  Vec q(2), u(2);
  q << 0.02, -0.25;
  u << -0.4, 0.3;
  return make_state(m, 0.0, q, u);
}

}  // namespace

TEST_CASE("scheme helpers") {
  CHECK(scheme_of(Method::adv_dual_pinn) == PinnScheme::advanced_dual);
  CHECK(method_of(PinnScheme::dual) == Method::dual_pinn);
  CHECK(is_advanced(PinnScheme::advanced_single));
  CHECK_FALSE(is_dual(PinnScheme::advanced_single));
  CHECK_THROWS_AS(scheme_of(Method::conventional), std::invalid_argument);
}

TEST_CASE("force interpolation") {
  Vec c(3);
  c << 0.1, 0.5, 0.9;
  const Mat f = interpolate_forces(Vec::Constant(1, 2.0), Vec::Constant(1, 4.0), c);
  CHECK(f(0, 0) == doctest::Approx(2.2));
  CHECK(f(0, 1) == doctest::Approx(3.0));
  CHECK(f(0, 2) == doctest::Approx(3.8));
  const auto k = constant_forces(Vec::Constant(1, 1.5), Vec::Constant(1, -0.5), 4);
  CHECK(k.lambda_N.cols() == 4);
  CHECK(k.lambda_T(0, 3) == -0.5);
}

TEST_CASE("collocation operator equals first-order Gauss collocation") {
  const auto m = model_two();
  const auto s = model2_state();
  for (int R : {1, 2, 4, 10}) {
    const auto tab = irk_coefficients(R);
    const double dt = 1e-3;
    const IrkStepOperator op(m, tab, dt);
    CHECK(op.P().rows() == 2 * (R + 1));
    StageForces f = interpolate_forces(Vec::Constant(1, 30.0), Vec::Constant(1, 45.0), Vec::Constant(1, -12.0),
                                       Vec::Constant(1, -18.0), tab.c);
    Vec qa, ua, qb, ub;
    op.end_state(s.q, op.solve(s.q, s.u, f), qa, ua);
    gauss_step(m, tab, dt, s.q, s.u, f, qb, ub);
    CHECK((qa - qb).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((ua - ub).cwiseAbs().maxCoeff() <= 1e-11);
  }
}

TEST_CASE("contact-free collocation reaches order 2R on the analytic oscillator") {
  const auto m = oracle::free_oscillator(1.0, 4.0);
  const oracle::Oscillator ref{1.0, 4.0, 1.0, 0.5};
  const auto tab = irk_coefficients(2);
  double prev = 0.0;
  for (double dt : {0.1, 0.05}) {
    const IrkStepOperator op(m, tab, dt);
    Vec q = Vec::Constant(1, ref.x0), u = Vec::Constant(1, ref.v0);
    const auto f = constant_forces(Vec::Zero(1), Vec::Zero(1), 2);
    const int steps = static_cast<int>(std::lround(1.0 / dt));
    for (int i = 0; i < steps; ++i) {
      Vec qE, uE;
      op.end_state(q, op.solve(q, u, f), qE, uE);
      q = qE;
      u = uE;
    }
    const double err = std::abs(q(0) - ref.x(1.0));
    if (prev > 0.0) CHECK(std::log2(prev / err) == doctest::Approx(4.0).epsilon(0.05));
    prev = err;
  }
}

TEST_CASE("trained step network reproduces the exact collocation solution") {
  const auto m = model_two();
  const auto s = model2_state();
  auto cfg = PinnStepConfig::defaults(4);
  const IrkStepOperator op(m, cfg.tableau, 1e-3);
  const auto f = constant_forces(Vec::Constant(1, 40.0), Vec::Constant(1, -16.0), 4);
  const auto res = pinn_step(op, s, f, cfg);
  CHECK(res.max_residual <= cfg.tol);
  Vec qE, uE;
  op.end_state(s.q, op.solve(s.q, s.u, f), qE, uE);
  CHECK((res.state.q - qE).cwiseAbs().maxCoeff() <= 1e-11);
  CHECK((res.state.u - uE).cwiseAbs().maxCoeff() <= 1e-9);
  // A warm start from the converged net converges on the first attempt.
  const auto again = pinn_step(op, s, f, cfg, &res.net);
  CHECK(again.attempts == 1);
}

TEST_CASE("property: contact response is the affine map of the end-of-step force") {
  const auto m = model_two();
  const auto s = model2_state();
  const auto tab = irk_coefficients(4);
  const double dt = 1e-3;
  const IrkStepOperator op(m, tab, dt);
  const Vec ones = Vec::Ones(4);
  StageForces alpha{Vec::Constant(1, 25.0).replicate(1, 4) * (ones - tab.c).asDiagonal(),
                    Vec::Constant(1, -7.0).replicate(1, 4) * (ones - tab.c).asDiagonal()};
  const auto resp = op.contact_response(s, alpha, tab.c, tab.c);
  for (auto [lN, lT] : {std::pair{0.0, 0.0}, std::pair{50.0, -20.0}, std::pair{10.0, 4.0}}) {
    StageForces f{alpha.lambda_N + Vec::Constant(1, lN) * tab.c.transpose(),
                  alpha.lambda_T + Vec::Constant(1, lT) * tab.c.transpose()};
    Vec qE, uE;
    op.end_state(s.q, op.solve(s.q, s.u, f), qE, uE);
    const double LN = lN * dt, LT = lT * dt;
    const double g = resp.g_free(0) + dt * (resp.G_NN(0, 0) * LN + resp.G_NT(0, 0) * LT);
    const double v = resp.gamma_free(0) + resp.G_TN(0, 0) * LN + resp.G_TT(0, 0) * LT;
    CHECK(gap(m, qE)(0) == doctest::Approx(g).epsilon(1e-12));
    CHECK(tangential_velocity(m, uE)(0) == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("single PINN on Model I tracks the conventional run and keeps stick at belt speed") {
  const auto m = model_one();
  const auto s0 = make_state(m, 0.0, Vec::Zero(1), Vec::Constant(1, 0.1));
  auto cfg = PinnStepConfig::defaults(4);
  cfg.scheme = PinnScheme::single;
  const auto tr = pinn_simulate(m, s0, 3.0, 0.01, cfg);
  REQUIRE(tr.states.size() == 301);
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const auto& s = tr.states[i];
    if (s.regime[0] == Regime::stick) CHECK(std::abs(s.u(0) - 0.1) <= 1e-6);
    CHECK(std::abs(s.lambda_T(0)) <= 0.1 * s.lambda_N(0) + 1e-12);
  }
  for (const auto& d : tr.diagnostics) {
    CHECK(d.dynamics_residual <= cfg.tol);
    CHECK(d.lcp_complementarity <= 1e-8);
  }
  CHECK(tr.method_tag == "single_pinn_4");
}

TEST_CASE("advanced dual PINN on Model II keeps the normal force nonnegative") {
  const auto m = model_two();
  const auto s0 = make_state(m, 0.0, Vec::Constant(2, -10.0), Vec::Constant(2, 1.0));
  auto cfg = PinnStepConfig::defaults(4);
  cfg.scheme = PinnScheme::advanced_dual;
  const auto tr = pinn_simulate(m, s0, 0.05, 1e-3, cfg);
  for (const auto& s : tr.states) CHECK(s.lambda_N(0) >= 0.0);
  for (const auto& d : tr.diagnostics) CHECK(d.lcp_complementarity <= 1e-8);
}

TEST_CASE("invalid step sizes are rejected") {
  const auto m = model_one();
  CHECK_THROWS_AS(IrkStepOperator(m, irk_coefficients(2), 0.0), std::invalid_argument);
  const IrkStepOperator op(m, irk_coefficients(2), 0.1);
  CHECK_THROWS_AS(op.rhs(Vec::Zero(1), Vec::Zero(1), constant_forces(Vec::Zero(1), Vec::Zero(1), 3)),
                  std::invalid_argument);
}
