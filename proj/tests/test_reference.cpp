#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nspinn/reference.hpp"
#include "oracles.hpp"

using namespace nspinn;

TEST_CASE("separated phase follows the analytic oscillator") {
  const auto m = oracle::free_oscillator(2.0, 8.0);
  const oracle::Oscillator ref{2.0, 8.0, 0.4, -1.0};
  const auto s0 = make_state(m, 0.0, Vec::Constant(1, ref.x0), Vec::Constant(1, ref.v0));
  const auto r = hybrid_simulate(m, s0, 5.0, 0.01);
  CHECK(r.events.empty());
  REQUIRE(r.trajectory.states.size() == 501);
  for (std::size_t i = 0; i < r.trajectory.states.size(); i += 25) {
    const double t = r.trajectory.times[i];
    CHECK(std::abs(r.trajectory.states[i].q(0) - ref.x(t)) <= 1e-8);
    CHECK(std::abs(r.trajectory.states[i].u(0) - ref.v(t)) <= 1e-8);
  }
}

TEST_CASE("constant-friction belt: first breakaway and slip arc in closed form") {
  // By hand: stick from x = 0 at belt speed v0 until k x = mu F_n, i.e.
  // t1 = mu F_n / (k v0) = 1; then x = mu F_n/k + (v0/w) sin(w (t - t1)).
  Model1Params p;
  p.law = FrictionLaw::constant(0.1);
  const auto m = model_one(p);
  const auto s0 = make_state(m, 0.0, Vec::Zero(1), Vec::Constant(1, 0.1));
  const auto r = switching_simulate_1dof(m, s0, 4.0, 0.01);
  REQUIRE(!r.events.empty());
  CHECK(r.events[0].kind == EventKind::stick_to_slip);
  CHECK(r.events[0].t_event == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.events[0].bracket_width <= 1e-10);
  const auto& tr = r.trajectory;
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const double t = tr.times[i];
    const double x = t <= 1.0 ? 0.1 * t : 0.1 + 0.1 * std::sin(t - 1.0);
    CHECK(std::abs(tr.states[i].q(0) - x) <= 1e-8);
  }
}

TEST_CASE("Stribeck belt: stick segments hold belt speed, slip on the cone") {
  const auto m = model_one();
  const auto s0 = make_state(m, 0.0, Vec::Zero(1), Vec::Constant(1, 0.1));
  const auto r = switching_simulate_1dof(m, s0, 30.0, 0.01);
  CHECK(r.events.size() >= 4);
  for (std::size_t k = 1; k < r.events.size(); ++k) {
    CHECK(r.events[k].t_event > r.events[k - 1].t_event);
    CHECK(r.events[k].kind != r.events[k - 1].kind);
  }
  for (const auto& s : r.trajectory.states) {
    const double mu = friction_coefficient(m.friction[0], s.gamma_T(0));
    if (s.regime[0] == Regime::stick) {
      CHECK(std::abs(s.gamma_T(0)) <= 1e-9);
      CHECK(std::abs(s.lambda_T(0)) <= 0.1 + 1e-12);
    } else {
      CHECK(std::abs(s.lambda_T(0)) == doctest::Approx(mu * s.lambda_N(0)));
    }
  }
}

TEST_CASE("Model II: separations and reattachments alternate, spring law holds") {
  const auto m = model_two();
  const auto s0 = make_state(m, 0.0, Vec::Constant(2, -10.0), Vec::Constant(2, 1.0));
  const auto r = root_shooting_simulate_2dof(m, s0, 5.0, 1e-3);
  int open = 0;
  for (const auto& e : r.events) {
    if (e.kind == EventKind::separation) ++open;
    if (e.kind == EventKind::reattachment) --open;
    CHECK(open >= 0);
    CHECK(open <= 1);
  }
  for (const auto& s : r.trajectory.states) {
    CHECK(s.lambda_N(0) >= 0.0);
    CHECK(s.lambda_N(0) == doctest::Approx(500.0 * std::max(0.0, -s.g_N(0))).epsilon(1e-12));
  }
  CHECK(r.trajectory.method_tag == "root_shooting");
}

TEST_CASE("property: event times are stable under tighter tolerances") {
  const auto m = model_one();
  const auto s0 = make_state(m, 0.0, Vec::Zero(1), Vec::Constant(1, 0.1));
  const auto a = switching_simulate_1dof(m, s0, 20.0, 0.01);
  ReferenceOptions tight;
  tight.rtol = 1e-12;
  tight.atol = 1e-14;
  const auto b = switching_simulate_1dof(m, s0, 20.0, 0.01, tight);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t k = 0; k < a.events.size(); ++k) CHECK(std::abs(a.events[k].t_event - b.events[k].t_event) <= 1e-6);
}

TEST_CASE("unsupported configurations are rejected") {
  const auto m1 = model_one();
  const auto s1 = make_state(m1, 0.0, Vec::Zero(1), Vec::Zero(1));
  CHECK_THROWS_AS(root_shooting_simulate_2dof(m1, s1, 1.0, 0.01), std::invalid_argument);
  auto rigid = model_two();
  rigid.contact_type = ContactType::rigid;
  const auto s2 = make_state(rigid, 0.0, Vec::Zero(2), Vec::Zero(2));
  CHECK_THROWS_AS(hybrid_simulate(rigid, s2, 1.0, 0.01), std::invalid_argument);
  ReferenceOptions bad;
  bad.event_tol = 0.0;
  CHECK_THROWS_AS(hybrid_simulate(m1, s1, 1.0, 0.01, bad), std::invalid_argument);
  CHECK(to_string(EventKind::reattachment) == "reattachment");
}
