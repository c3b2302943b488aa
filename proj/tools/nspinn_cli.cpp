#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "nspinn/harness.hpp"
#include "nspinn/lcp_pinn.hpp"
#include "nspinn/simd.hpp"

using namespace nspinn;

namespace {

struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what) : std::runtime_error(stage + ": " + what) {}
};

std::string read_all(const std::string& path) {
  std::stringstream ss;
  if (path.empty() || path == "-") {
    ss << std::cin.rdbuf();
  } else {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    ss << is.rdbuf();
  }
  return ss.str();
}

// JSON {"A": [[...]], "b": [...]} or plain numbers: N, then A row-major, then b.
LcpProblem parse_lcp(const std::string& text) {
  LcpProblem p;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const auto j = nlohmann::json::parse(text);
    const auto A = j.at("A").get<std::vector<std::vector<double>>>();
    const auto b = j.at("b").get<std::vector<double>>();
    const int n = static_cast<int>(b.size());
    p.A.resize(n, n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(A.at(i).size()) != n) throw std::invalid_argument("A must be square and match b");
      for (int k = 0; k < n; ++k) p.A(i, k) = A[i][k];
    }
    if (static_cast<int>(A.size()) != n) throw std::invalid_argument("A must be square and match b");
    p.b = Eigen::Map<const Vec>(b.data(), n);
  } else {
    std::istringstream is(text);
    int n = 0;
    if (!(is >> n) || n <= 0) throw std::invalid_argument("expected the dimension N first");
    p.A.resize(n, n);
    p.b.resize(n);
    for (int i = 0; i < n * n; ++i)
      if (!(is >> p.A(i / n, i % n))) throw std::invalid_argument("matrix A truncated");
    for (int i = 0; i < n; ++i)
      if (!(is >> p.b(i))) throw std::invalid_argument("vector b truncated");
  }
  if (!p.well_formed()) throw std::invalid_argument("LCP has non-finite or mismatched entries");
  return p;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

ModelSpec model_from_arg(const std::string& arg) {
  if (arg == "model1" || arg == "model2") {
    ModelSpec s;
    s.kind = arg;
    return s;
  }
  return parse_model_spec(read_all(arg));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nspinn: nonsmooth contact dynamics with PINN and LCP time stepping"};
  app.require_subcommand(1);
  std::string isa;
  app.add_option("--isa", isa, "Kernel variant: scalar, avx2 or neon (default: best available)");

  // solve-lcp
  auto* lcp_cmd = app.add_subcommand("solve-lcp", "Solve an LCP read from a file or stdin");
  std::string lcp_file = "-", lcp_method = "pivoting";
  double lcp_tol = kLcpDefaultTol;
  std::uint64_t lcp_seed = 1;
  lcp_cmd->add_option("file", lcp_file, "Problem file (JSON or plain numbers); '-' for stdin");
  lcp_cmd->add_option("--method", lcp_method, "pivoting | pinn")->check(CLI::IsMember({"pivoting", "pinn"}));
  lcp_cmd->add_option("--tol", lcp_tol, "Pivoting tolerance");
  lcp_cmd->add_option("--seed", lcp_seed, "Network seed (pinn)");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate one model with one method");
  std::string sim_model = "model1", sim_method = "conventional", sim_out;
  double sim_dt = 0.01, sim_t_end = 10.0;
  int sim_order = 4;
  std::vector<double> sim_q0, sim_u0;
  std::optional<double> sim_mu, sim_delta;
  bool sim_oracle = false;
  sim_cmd->add_option("--model", sim_model, "model1 | model2 | model spec JSON file");
  sim_cmd->add_option("--method", sim_method,
                      "conventional | rk4_lcp | single_pinn | dual_pinn | adv_single_pinn | adv_dual_pinn");
  sim_cmd->add_option("--dt", sim_dt, "Time step")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--order", sim_order, "IRK stages R of the PINN schemes")->check(CLI::Range(1, 100));
  sim_cmd->add_option("--t-end", sim_t_end, "Final time")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--q0", sim_q0, "Initial displacements");
  sim_cmd->add_option("--u0", sim_u0, "Initial velocities");
  sim_cmd->add_option("--mu", sim_mu, "Constant friction coefficient (model2)");
  sim_cmd->add_option("--delta", sim_delta, "Rational Stribeck parameter (model1)");
  sim_cmd->add_flag("--oracle", sim_oracle, "Also run the event-driven reference and report errors");
  sim_cmd->add_option("--out", sim_out, "Output directory for CSV files");

  // eigen-sweep
  auto* eig_cmd = app.add_subcommand("eigen-sweep", "Sweep the sliding-contact eigenvalues over mu");
  double mu_min = 0.0, mu_max = 1.5;
  int mu_steps = 150;
  std::string eig_model = "model2";
  eig_cmd->add_option("--mu-min", mu_min, "Lower friction coefficient");
  eig_cmd->add_option("--mu-max", mu_max, "Upper friction coefficient");
  eig_cmd->add_option("--steps", mu_steps, "Number of intervals")->check(CLI::PositiveNumber);
  eig_cmd->add_option("--model", eig_model, "model2 | model spec JSON file");

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Run a full experiment config");
  std::string cmp_file;
  cmp_cmd->add_option("config", cmp_file, "Experiment config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!isa.empty()) {
      simd::Isa want;
      if (!simd::parse_isa(isa, want)) throw StageError("isa", "unknown variant " + isa);
      if (!simd::set_isa(want)) throw StageError("isa", isa + " not available on this host");
    }

    if (*lcp_cmd) {
      LcpProblem p;
      try {
        p = parse_lcp(read_all(lcp_file));
      } catch (const std::exception& e) {
        throw StageError("read-lcp", e.what());
      }
      LcpSolution s;
      if (lcp_method == "pivoting") {
        s = solve_pivoting(p, lcp_tol);
      } else {
        LcpPinnConfig cfg;
        cfg.seed = lcp_seed;
        s = solve_lcp_pinn(p, cfg);
      }
      nlohmann::ordered_json j;
      j["method"] = lcp_method;
      j["status"] = std::string(to_string(s.status));
      j["x"] = to_std(s.x);
      j["y"] = to_std(s.y);
      j["residual"] = s.residual;
      j["iterations"] = s.iterations;
      std::cout << j.dump(2) << "\n";
      return s.status == LcpStatus::solved ? 0 : 2;
    }

    if (*sim_cmd) {
      ExperimentConfig cfg;
      try {
        cfg.model = model_from_arg(sim_model);
        if (sim_mu) cfg.model.p2.law = FrictionLaw::constant(*sim_mu);
        if (sim_delta) cfg.model.p1.law = FrictionLaw::rational(cfg.model.p1.law.mu_s, *sim_delta);
        if (!sim_q0.empty()) cfg.q0 = Eigen::Map<const Vec>(sim_q0.data(), static_cast<Eigen::Index>(sim_q0.size()));
        if (!sim_u0.empty()) cfg.u0 = Eigen::Map<const Vec>(sim_u0.data(), static_cast<Eigen::Index>(sim_u0.size()));
        const auto m = parse_method(sim_method);
        if (!m) throw std::invalid_argument("unknown method " + sim_method);
        cfg.name = "simulate";
        cfg.t_end = sim_t_end;
        cfg.oracle = sim_oracle;
        cfg.output_dir = sim_out;
        cfg.methods.push_back({*m, sim_dt, sim_order, 1});
      } catch (const std::exception& e) {
        throw StageError("configure", e.what());
      }
      ComparisonReport r;
      try {
        r = run_experiment(cfg);
      } catch (const std::exception& e) {
        throw StageError("simulate", e.what());
      }
      std::cout << report_text(r);
      if (!r.methods.front().ok) throw StageError("simulate", r.methods.front().error);
      return 0;
    }

    if (*eig_cmd) {
      MechModel m;
      try {
        ModelSpec s = model_from_arg(eig_model);
        m = build_model(s);
      } catch (const std::exception& e) {
        throw StageError("model", e.what());
      }
      const EigenSweep sw = eigen_sweep(m, mu_min, mu_max, mu_steps);
      std::cout << "mu,max_real";
      for (std::size_t k = 0; k < sw.points.front().eig.size(); ++k) std::cout << ",re_" << k + 1 << ",im_" << k + 1;
      std::cout << "\n";
      char buf[64];
      for (const auto& p : sw.points) {
        std::snprintf(buf, sizeof buf, "%.6f,%.10g", p.mu, p.max_real);
        std::cout << buf;
        for (auto e : p.eig) {
          std::snprintf(buf, sizeof buf, ",%.10g,%.10g", e.real(), e.imag());
          std::cout << buf;
        }
        std::cout << "\n";
      }
      if (sw.mu_critical) std::fprintf(stderr, "mu_critical = %.6f\n", *sw.mu_critical);
      else std::fprintf(stderr, "mu_critical: stable over the sweep\n");
      return 0;
    }

    if (*cmp_cmd) {
      ExperimentConfig cfg;
      try {
        cfg = load_experiment(cmp_file);
      } catch (const std::exception& e) {
        throw StageError("config", e.what());
      }
      ComparisonReport r;
      try {
        r = run_experiment(cfg);
      } catch (const std::exception& e) {
        throw StageError("experiment", e.what());
      }
      std::cout << report_text(r);
      for (const auto& m : r.methods)
        if (!m.ok) {
          std::fprintf(stderr, "error: method %s failed: %s\n", m.label.c_str(), m.error.c_str());
          return 3;
        }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
