#include "nspinn/time_stepping.hpp"

#include <cmath>

#include "nspinn/lcp_pinn.hpp"
#include "nspinn/pinn_dynamics.hpp"

namespace nspinn {

std::string method_name(Method m) {
  switch (m) {
    case Method::conventional: return "conventional";
    case Method::rk4_lcp: return "rk4_lcp";
    case Method::single_pinn: return "single_pinn";
    case Method::dual_pinn: return "dual_pinn";
    case Method::adv_single_pinn: return "adv_single_pinn";
    case Method::adv_dual_pinn: return "adv_dual_pinn";
  }
  return "unknown";
}

std::optional<Method> parse_method(const std::string& s) {
  for (Method m : {Method::conventional, Method::rk4_lcp, Method::single_pinn, Method::dual_pinn,
                   Method::adv_single_pinn, Method::adv_dual_pinn})
    if (s == method_name(m)) return m;
  if (s == "rk4") return Method::rk4_lcp;
  if (s == "single") return Method::single_pinn;
  if (s == "dual") return Method::dual_pinn;
  if (s == "advanced_single") return Method::adv_single_pinn;
  if (s == "advanced_dual") return Method::adv_dual_pinn;
  return std::nullopt;
}

bool is_pinn(Method m) { return m != Method::conventional && m != Method::rk4_lcp; }

std::string method_tag(Method m, int order) {
  return is_pinn(m) ? method_name(m) + "_" + std::to_string(order) : method_name(m);
}

LcpSolver pivoting_solver(double tol) {
  return [tol](const LcpProblem& p) { return solve_pivoting(p, tol); };
}

double lcp_complementarity_error(const LcpProblem& p, const Vec& x, const Vec& y) {
  if (p.size() == 0) return 0.0;
  const LcpScaling sc = LcpScaling::compute(p, true);
  const LcpProblem q = sc.apply(p);
  const Vec xs = x.cwiseQuotient(sc.col) / sc.rhs;
  const Vec ys = y.cwiseProduct(sc.row) / sc.rhs;
  double e = (ys - q.A * xs - q.b).cwiseAbs().maxCoeff();
  e = std::max(e, xs.cwiseProduct(ys).cwiseAbs().maxCoeff());
  e = std::max(e, -xs.minCoeff());
  e = std::max(e, -ys.minCoeff());
  return e;
}

long step_count(double t0, double t_end, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (t_end < t0) throw std::invalid_argument("t_end before initial time");
  return std::lround(std::floor((t_end - t0) / dt + 1e-9));
}

namespace {

struct SolvedStep {
  AssembledLcp lcp;
  ContactImpulses ci;
};

SolvedStep solve_step_lcp(const MechModel& m, const SystemState& s, double dt, const LcpSolver& solver,
                          StepDiagnostics* diag) {
  SolvedStep out;
  out.lcp = assemble_step_lcp(m, s, dt);
  const LcpSolution sol = solver(out.lcp.problem);
  if (sol.status != LcpStatus::solved)
    throw std::runtime_error("step LCP failed: " + std::string(to_string(sol.status)));
  out.ci = decode(out.lcp, sol.x, sol.y);
  if (diag) {
    diag->lcp_residual = sol.residual;
    diag->lcp_complementarity = lcp_complementarity_error(out.lcp.problem, sol.x, sol.y);
  }
  return out;
}

SystemState finish_state(const MechModel& m, double t, Vec q, Vec u, const Vec& lN, const Vec& lT) {
  SystemState n;
  n.t = t;
  n.q = std::move(q);
  n.u = std::move(u);
  n.lambda_N = lN;
  n.lambda_T = lT;
  n.g_N = gap(m, n.q);
  n.gamma_T = tangential_velocity(m, n.u);
  n.regime = classify_regimes(m, n.gamma_T, n.lambda_N);
  return n;
}

}  // namespace

SystemState step_conventional(const MechModel& m, const SystemState& s, double dt, const LcpSolver& lcp,
                              StepDiagnostics* diag) {
  const SolvedStep st = solve_step_lcp(m, s, dt, lcp, diag);
  Eigen::LDLT<Mat> Minv(m.M);
  const Vec h = h_vector(m, s.q, s.u);
  const Vec du = Minv.solve(h * dt + m.W_N * st.ci.Lambda_N + m.W_T * st.ci.Lambda_T);
  Vec u = s.u + du;
  Vec q = s.q + u * dt;
  return finish_state(m, s.t + dt, std::move(q), std::move(u), st.ci.Lambda_N / dt, st.ci.Lambda_T / dt);
}

SystemState step_rk4_lcp(const MechModel& m, const SystemState& s, double dt, const LcpSolver& lcp,
                         StepDiagnostics* diag) {
  const SolvedStep st = solve_step_lcp(m, s, dt, lcp, diag);
  Eigen::LDLT<Mat> Minv(m.M);
  const Vec lN = st.ci.Lambda_N / dt, lT = st.ci.Lambda_T / dt;
  const Vec F = m.W_N * lN + m.W_T * lT;
  auto acc = [&](const Vec& q, const Vec& u) -> Vec { return Minv.solve(h_vector(m, q, u) + F); };
  const Vec k1q = s.u, k1u = acc(s.q, s.u);
  const Vec k2q = s.u + 0.5 * dt * k1u, k2u = acc(s.q + 0.5 * dt * k1q, k2q);
  const Vec k3q = s.u + 0.5 * dt * k2u, k3u = acc(s.q + 0.5 * dt * k2q, k3q);
  const Vec k4q = s.u + dt * k3u, k4u = acc(s.q + dt * k3q, k4q);
  Vec q = s.q + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
  Vec u = s.u + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
  return finish_state(m, s.t + dt, std::move(q), std::move(u), lN, lT);
}

Trajectory simulate(const MechModel& m, const SystemState& initial, double t_end, double dt, Method method,
                    const SimulateOptions& opt) {
  if (is_pinn(method)) {
    PinnStepConfig cfg = opt.pinn ? *opt.pinn : PinnStepConfig::defaults(opt.order);
    cfg.scheme = scheme_of(method);
    cfg.lcp_tol = opt.lcp_tol;
    return pinn_simulate(m, initial, t_end, dt, cfg);
  }
  m.validate();
  const long n = step_count(initial.t, t_end, dt);
  Trajectory tr;
  tr.dt = dt;
  tr.method_tag = method_tag(method, 0);
  tr.times.reserve(n + 1);
  tr.states.reserve(n + 1);
  tr.diagnostics.reserve(n);
  tr.times.push_back(initial.t);
  tr.states.push_back(initial);
  const LcpSolver solver = pivoting_solver(opt.lcp_tol);
  for (long i = 0; i < n; ++i) {
    StepDiagnostics d;
    try {
      SystemState next = method == Method::conventional ? step_conventional(m, tr.states.back(), dt, solver, &d)
                                                        : step_rk4_lcp(m, tr.states.back(), dt, solver, &d);
      next.t = initial.t + (i + 1) * dt;
      tr.times.push_back(next.t);
      tr.states.push_back(std::move(next));
      tr.diagnostics.push_back(d);
    } catch (const SimulationError&) {
      throw;
    } catch (const std::exception& e) {
      throw SimulationError(tr.method_tag + ": " + e.what(), i);
    }
  }
  return tr;
}

}  // namespace nspinn
