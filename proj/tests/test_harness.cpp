#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "json.hpp"
#include "nspinn/harness.hpp"

using namespace nspinn;

namespace {

Trajectory regimes(const std::vector<Regime>& rs, double dt) {
  Trajectory tr;
  tr.dt = dt;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    SystemState s;
    s.t = i * dt;
    s.q = s.u = Vec::Zero(1);
    s.lambda_N = s.lambda_T = Vec::Zero(1);
    s.regime = {rs[i]};
    tr.times.push_back(s.t);
    tr.states.push_back(s);
  }
  return tr;
}

std::vector<Regime> runs(std::initializer_list<std::pair<Regime, int>> spec) {
  std::vector<Regime> out;
  for (auto [r, n] : spec) out.insert(out.end(), n, r);
  return out;
}

}  // namespace

TEST_CASE("rms and relative error") {
  CHECK(rms({3.0, -3.0, 3.0}) == doctest::Approx(3.0));
  CHECK(relative_error(101.0, 100.0) == doctest::Approx(1.0));
  CHECK_THROWS(rms({}));
  CHECK_THROWS(relative_error(1.0, 0.0));
}

TEST_CASE("property: rms(k x) = |k| rms(x)") {
  std::vector<double> x;
  for (int i = 0; i < 50; ++i) x.push_back(std::sin(0.3 * i) + 0.1 * i);
  for (double k : {-2.5, 0.0, 1e-3, 7.0}) {
    std::vector<double> y = x;
    for (auto& v : y) v *= k;
    CHECK(rms(y) == doctest::Approx(std::abs(k) * rms(x)).epsilon(1e-14));
  }
}

TEST_CASE("spectrum of a sum of tones recovers frequencies and amplitudes") {
  const double dt = 0.01;
  std::vector<double> s;
  for (int i = 0; i < 1000; ++i) {
    const double t = i * dt;
    s.push_back(5.0 + 2.0 * std::sin(2 * std::numbers::pi * 3.0 * t) + 0.5 * std::cos(2 * std::numbers::pi * 9.0 * t));
  }
  const auto spec = spectrum(s, dt);
  CHECK(spec.size() == 501);
  CHECK(spec[0].amplitude == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
  const auto peaks = spectrum_peaks(spec);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0].frequency == doctest::Approx(3.0));
  CHECK(peaks[0].amplitude == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(peaks[1].frequency == doctest::Approx(9.0));
  CHECK(peaks[1].amplitude == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("regime sequence merges chatter shorter than the minimum duration") {
  const double dt = 0.01;
  auto tr = regimes(runs({{Regime::stick, 20}, {Regime::slip, 2}, {Regime::stick, 30}, {Regime::slip, 40}}), dt);
  CHECK(regime_sequence(tr, 0, 5 * dt) == std::vector<Regime>{Regime::stick, Regime::slip});
  CHECK(regime_sequence(tr, 0, 0.0).size() == 4);
  auto lead = regimes(runs({{Regime::slip, 2}, {Regime::stick, 30}}), dt);
  CHECK(regime_sequence(lead, 0, 5 * dt) == std::vector<Regime>{Regime::stick});
}

TEST_CASE("validity check: reflexive, symmetric, sensitive to a missed regime") {
  const double dt = 0.01;
  const auto a = regimes(runs({{Regime::stick, 20}, {Regime::slip, 30}, {Regime::stick, 20}}), dt);
  const auto b = regimes(runs({{Regime::stick, 23}, {Regime::slip, 2}, {Regime::stick, 1}, {Regime::slip, 24},
                               {Regime::stick, 20}}),
                         dt);
  const auto c = regimes(runs({{Regime::stick, 20}, {Regime::slip, 50}}), dt);
  CHECK(validity_check(a, a));
  CHECK(validity_check(a, b));
  CHECK(validity_check(b, a));
  CHECK_FALSE(validity_check(a, c));
  CHECK_FALSE(validity_check(c, a));
}

TEST_CASE("series extraction") {
  const auto m = model_two();
  const auto q = default_quantities(m);
  CHECK(q == std::vector<std::string>{"lambda_N1", "q1", "q2", "u1", "u2"});
  CHECK(default_quantities(model_one()) == std::vector<std::string>{"q1", "u1"});
  Trajectory tr = regimes({Regime::slip}, 0.1);
  tr.states[0].q(0) = 4.0;
  CHECK(series(tr, "q1") == std::vector<double>{4.0});
  CHECK_THROWS(series(tr, "x1"));
  CHECK_THROWS(series(tr, "q0"));
}

TEST_CASE("config parsing") {
  const auto cfg = parse_experiment(R"({
    "name": "t", "model": {"kind": "model2", "friction": {"kind": "constant", "mu": 1.2}},
    "initial": {"q": [-1, -1], "u": [1, 1]}, "t_end": 0.5,
    "oracle": {"enabled": true, "event_tol": 1e-9},
    "methods": [{"method": "adv_dual_pinn", "dt": 0.001, "order": 10, "seed": 3}],
    "pinn": {"hidden": [10, 10], "lcp_pinn": {"restarts": 5}}
  })");
  CHECK(cfg.model.p2.law.mu_s == 1.2);
  CHECK((*cfg.q0)(0) == -1.0);
  CHECK(cfg.oracle_opt.event_tol == 1e-9);
  REQUIRE(cfg.methods.size() == 1);
  CHECK(cfg.methods[0].method == Method::adv_dual_pinn);
  CHECK(cfg.methods[0].order == 10);
  CHECK(cfg.pinn->hidden == std::vector<int>{10, 10});
  CHECK(cfg.pinn->lcp_pinn.restarts == 5);
  CHECK(run_label(cfg.methods[0]) == "adv_dual_pinn_10_dt0.001");
  CHECK_THROWS(parse_experiment(R"({"methods": [{"method": "euler", "dt": 0.1}]})"));
  CHECK_THROWS(parse_experiment(R"({"methods": [{"method": "conventional", "dt": -1}]})"));
  CHECK_THROWS(parse_experiment(R"({"model": {"kind": "model3"}})"));
  CHECK_THROWS(parse_experiment("not json"));
}

TEST_CASE("custom model from config") {
  const auto s = parse_model_spec(R"({
    "kind": "custom", "M": [[1]], "Ks": [[1]], "W_N": [[0]], "W_T": [[1]], "w_T": [-0.1],
    "prescribed_normal": [1], "friction": {"kind": "rational", "mu_s": 0.1, "delta": 1}
  })");
  const auto m = build_model(s);
  CHECK(m.n_dof() == 1);
  CHECK(m.friction[0].kind == FrictionKind::stribeck_rational);
}

TEST_CASE("oracle-only experiment reports zero error rows") {
  ExperimentConfig cfg;
  cfg.t_end = 2.0;
  const auto r = run_experiment(cfg);
  CHECK(r.methods.empty());
  REQUIRE(!r.oracle.empty());
  for (const auto& q : r.oracle) CHECK(q.rel_error == 0.0);
  CHECK(report_text(r).find("oracle") != std::string::npos);
}

TEST_CASE("experiment report is byte-reproducible and failures stay per method") {
  ExperimentConfig cfg;
  cfg.t_end = 3.0;
  cfg.threads = 2;
  cfg.methods = {{Method::conventional, 0.01, 4, 1}, {Method::single_pinn, 0.01, 2, 1}};
  const auto dir = (std::filesystem::temp_directory_path() / "nspinn_harness_test").string();
  std::filesystem::remove_all(dir);
  cfg.output_dir = dir;
  const auto a = run_experiment(cfg);
  cfg.output_dir.clear();
  const auto b = run_experiment(cfg);
  CHECK(report_text(a) == report_text(b));
  CHECK(report_json(a) == report_json(b));
  for (const auto& m : a.methods) {
    CHECK(m.ok);
    CHECK(m.valid);
  }
  for (const char* f : {"report.txt", "report.json", "events.csv", "spectrum_oracle.csv",
                        "trajectory_oracle_dt0.01.csv", "trajectory_conventional_dt0.01.csv"})
    CHECK(std::filesystem::exists(std::filesystem::path(dir) / f));
  const auto j = nlohmann::json::parse(std::ifstream(std::filesystem::path(dir) / "report.json"));
  CHECK(j["methods"].size() == 2);
  std::filesystem::remove_all(dir);

  // A method whose LCP cannot be solved is reported, the rest still run.
  ExperimentConfig bad = cfg;
  bad.pinn = PinnStepConfig{};
  bad.pinn->max_iter = 1;
  bad.pinn->restarts = 0;
  const auto r = run_experiment(bad);
  CHECK(r.methods[0].ok);
  CHECK_FALSE(r.methods[1].ok);
  CHECK(r.methods[1].error.find("step") != std::string::npos);
}
