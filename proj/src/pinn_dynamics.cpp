#include "nspinn/pinn_dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace nspinn {

PinnScheme scheme_of(Method m) {
  switch (m) {
    case Method::single_pinn: return PinnScheme::single;
    case Method::dual_pinn: return PinnScheme::dual;
    case Method::adv_single_pinn: return PinnScheme::advanced_single;
    case Method::adv_dual_pinn: return PinnScheme::advanced_dual;
    default: break;
  }
  throw std::invalid_argument("scheme_of: not a PINN method: " + method_name(m));
}

Method method_of(PinnScheme s) {
  switch (s) {
    case PinnScheme::single: return Method::single_pinn;
    case PinnScheme::dual: return Method::dual_pinn;
    case PinnScheme::advanced_single: return Method::adv_single_pinn;
    case PinnScheme::advanced_dual: return Method::adv_dual_pinn;
  }
  return Method::single_pinn;
}

bool is_advanced(PinnScheme s) { return s == PinnScheme::advanced_single || s == PinnScheme::advanced_dual; }
bool is_dual(PinnScheme s) { return s == PinnScheme::dual || s == PinnScheme::advanced_dual; }

PinnStepConfig PinnStepConfig::defaults(int order) {
  PinnStepConfig cfg;
  cfg.tableau = irk_coefficients(order);
  return cfg;
}

Mat interpolate_forces(const Vec& prev, const Vec& curr, const Vec& c) {
  if (prev.size() != curr.size()) throw std::invalid_argument("interpolate_forces: dimension mismatch");
  Mat out(prev.size(), c.size());
  for (int k = 0; k < c.size(); ++k) out.col(k) = prev + c(k) * (curr - prev);
  return out;
}

StageForces interpolate_forces(const Vec& lN_prev, const Vec& lN_curr, const Vec& lT_prev, const Vec& lT_curr,
                               const Vec& c) {
  return {interpolate_forces(lN_prev, lN_curr, c), interpolate_forces(lT_prev, lT_curr, c)};
}

StageForces constant_forces(const Vec& lN, const Vec& lT, int stages) {
  return {lN.replicate(1, stages), lT.replicate(1, stages)};
}

IrkStepOperator::IrkStepOperator(const MechModel& m, const ButcherTableau& tab, double dt)
    : m_(m), tab_(tab), dt_(dt), n_(m.n_dof()), R_(tab.order) {
  if (!(dt > 0.0)) throw std::invalid_argument("IrkStepOperator: dt must be positive");
  m.validate();
  Minv_ = m.M.ldlt().solve(Mat::Identity(n_, n_));
  const Mat K = Minv_ * m.Ks, C = Minv_ * m.Cs;
  const Mat& A = tab.a;
  const Mat A2 = A * A;
  const Vec bA = A.transpose() * tab.b;
  const int N = n_ * (R_ + 1);
  P_ = Mat::Identity(N, N);
  for (int k = 0; k < R_; ++k)
    for (int j = 0; j < R_; ++j)
      P_.block(k * n_, j * n_, n_, n_) += dt * dt * A2(k, j) * K + dt * A(k, j) * C;
  for (int j = 0; j < R_; ++j) P_.block(R_ * n_, j * n_, n_, n_) = dt * dt * bA(j) * K + dt * tab.b(j) * C;
  lu_.compute(P_);
}

Vec IrkStepOperator::force_rhs(const StageForces& f) const {
  // Stage force accelerations M^{-1} (W_N lN_r + W_T lT_r), weighted by a and b.
  Mat F(n_, R_);
  for (int r = 0; r < R_; ++r) F.col(r) = Minv_ * (m_.W_N * f.lambda_N.col(r) + m_.W_T * f.lambda_T.col(r));
  Vec d(n_ * (R_ + 1));
  for (int k = 0; k < R_; ++k) d.segment(k * n_, n_) = dt_ * F * tab_.a.row(k).transpose();
  d.segment(R_ * n_, n_) = dt_ * F * tab_.b;
  return d;
}

Vec IrkStepOperator::rhs(const Vec& q, const Vec& u, const StageForces& f) const {
  if (q.size() != n_ || u.size() != n_) throw std::invalid_argument("IrkStepOperator: state dimension");
  if (f.lambda_N.cols() != R_ || f.lambda_T.cols() != R_) throw std::invalid_argument("StageForces: stage count");
  const Vec a0 = Minv_ * (m_.f_e - m_.Ks * q);
  Vec d = force_rhs(f);
  for (int k = 0; k < R_; ++k) d.segment(k * n_, n_) += u + dt_ * tab_.c(k) * a0;
  d.segment(R_ * n_, n_) += u + dt_ * a0;  // sum of b is 1
  return d;
}

Vec IrkStepOperator::solve(const Vec& q, const Vec& u, const StageForces& f) const { return lu_.solve(rhs(q, u, f)); }

void IrkStepOperator::end_state(const Vec& q, const Vec& z, Vec& qE, Vec& uE) const {
  qE = q;
  for (int r = 0; r < R_; ++r) qE += dt_ * tab_.b(r) * z.segment(r * n_, n_);
  uE = z.segment(R_ * n_, n_);
}

ContactResponse IrkStepOperator::contact_response(const SystemState& s, const StageForces& alpha, const Vec& beta_N,
                                                  const Vec& beta_T) const {
  const int c = m_.n_contacts();
  ContactResponse r;
  Vec qE, uE;
  end_state(s.q, solve(s.q, s.u, alpha), qE, uE);
  r.g_free = gap(m_, qE) + m_.w_N * dt_;
  r.gamma_free = tangential_velocity(m_, uE);
  r.G_NN.resize(c, c);
  r.G_NT.resize(c, c);
  r.G_TN.resize(c, c);
  r.G_TT.resize(c, c);
  const Vec zero_q = Vec::Zero(n_);
  StageForces unit{Mat::Zero(c, R_), Mat::Zero(c, R_)};
  for (int j = 0; j < c; ++j) {
    for (int normal = 0; normal < 2; ++normal) {
      unit.lambda_N.setZero();
      unit.lambda_T.setZero();
      if (normal) unit.lambda_N.row(j) = beta_N.transpose();
      else unit.lambda_T.row(j) = beta_T.transpose();
      Vec dq, du;
      end_state(zero_q, lu_.solve(force_rhs(unit)), dq, du);
      // Columns per unit impulse Lambda = lambda dt.
      const Vec gcol = m_.W_N.transpose() * dq / (dt_ * dt_);
      const Vec vcol = m_.W_T.transpose() * du / dt_;
      if (normal) {
        r.G_NN.col(j) = gcol;
        r.G_TN.col(j) = vcol;
      } else {
        r.G_NT.col(j) = gcol;
        r.G_TT.col(j) = vcol;
      }
    }
  }
  return r;
}

Fnn make_step_net(int n_dof, const PinnStepConfig& cfg, std::uint64_t seed) {
  std::vector<int> widths{n_dof};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(n_dof * (cfg.tableau.order + 1));
  Fnn net(widths, cfg.activation);
  net.init_xavier(seed);
  return net;
}

PinnStepResult pinn_step(const IrkStepOperator& op, const SystemState& s, const StageForces& forces,
                         const PinnStepConfig& cfg, const Fnn* warm) {
  const int n = op.n_dof();
  const Vec d = op.rhs(s.q, s.u, forces);
  const double scale = std::max(1.0, s.u.cwiseAbs().maxCoeff());
  const Mat& P = op.P();
  Vec r(d.size());
  const OutputLoss loss = [&](const Vec& out, Vec* dout) {
    r.noalias() = P * out;
    r -= d;
    r /= scale;
    if (dout) dout->noalias() = (2.0 / scale) * (P.transpose() * r);
    return r.squaredNorm();
  };
  const auto max_res = [&](const Fnn& net) {
    loss(forward(net, s.q), nullptr);
    return r.cwiseAbs().maxCoeff();
  };

  const bool use_warm = warm && cfg.warm_start && warm->input_size() == n &&
                        warm->output_size() == n * (cfg.tableau.order + 1);
  const int attempts = cfg.restarts + 1 + (use_warm ? 1 : 0);
  TrainOptions to;
  to.tol = cfg.tol * cfg.tol;
  to.max_iter = cfg.max_iter;

  PinnStepResult best;
  best.max_residual = INFINITY;
  for (int k = 0; k < attempts; ++k) {
    Fnn start;
    if (use_warm && k == 0) start = *warm;
    else start = make_step_net(n, cfg, cfg.seed + 7919ULL * static_cast<std::uint64_t>(use_warm ? k - 1 : k));
    auto [net, rep] = train_lbfgs(start, loss, s.q, to);
    const double mr = max_res(net);
    if (std::isfinite(mr) && mr < best.max_residual) {
      best.net = std::move(net);
      best.report = rep;
      best.max_residual = mr;
    }
    best.attempts = k + 1;
    if (best.max_residual <= cfg.tol) break;
  }
  if (!(best.max_residual <= cfg.tol))
    throw std::runtime_error("pinn_step: not_converged (residual " + std::to_string(best.max_residual) + ")");

  const Vec z = forward(best.net, s.q);
  best.state.t = s.t + op.dt();
  op.end_state(s.q, z, best.state.q, best.state.u);
  return best;
}

PinnStepResult pinn_step(const MechModel& m, const SystemState& s, double dt, const StageForces& forces,
                         const PinnStepConfig& cfg, const Fnn* warm) {
  const IrkStepOperator op(m, cfg.tableau, dt);
  PinnStepResult res = pinn_step(op, s, forces, cfg, warm);
  SystemState& st = res.state;
  st.lambda_N = forces.lambda_N.col(forces.lambda_N.cols() - 1);
  st.lambda_T = forces.lambda_T.col(forces.lambda_T.cols() - 1);
  st.g_N = gap(m, st.q);
  st.gamma_T = tangential_velocity(m, st.u);
  st.regime = classify_regimes(m, st.gamma_T, st.lambda_N);
  return res;
}

namespace {

struct LcpStage {
  AssembledLcp lcp;
  LcpSolution sol;
  ContactImpulses ci;
  int attempts = 1;
  int mu_iterations = 0;
};

class StepLcpSolver {
 public:
  explicit StepLcpSolver(const PinnStepConfig& cfg) : cfg_(cfg) {}

  LcpSolution solve(const LcpProblem& p, int& attempts) {
    if (!is_dual(cfg_.scheme)) {
      attempts = 1;
      return solve_pivoting(p, cfg_.lcp_tol);
    }
    const Fnn* warm = cfg_.warm_start && have_net_ ? &net_ : nullptr;
    LcpPinnResult res = solve_lcp_pinn_detailed(p, cfg_.lcp_pinn, warm);
    attempts = res.attempts;
    if (res.solution.status == LcpStatus::solved) {
      net_ = std::move(res.net);
      have_net_ = true;
    }
    return res.solution;
  }

 private:
  const PinnStepConfig& cfg_;
  Fnn net_;
  bool have_net_ = false;
};

}  // namespace

Trajectory pinn_simulate(const MechModel& m, const SystemState& initial, double t_end, double dt,
                         const PinnStepConfig& cfg) {
  m.validate();
  const long steps = step_count(initial.t, t_end, dt);
  const int R = cfg.tableau.order;
  const int c = m.n_contacts();
  const Vec& cn = cfg.tableau.c;
  const bool advanced = is_advanced(cfg.scheme);
  const IrkStepOperator op(m, cfg.tableau, dt);
  StepLcpSolver lcp_solver(cfg);

  Trajectory tr;
  tr.dt = dt;
  tr.method_tag = method_tag(method_of(cfg.scheme), R);
  tr.times.reserve(steps + 1);
  tr.states.reserve(steps + 1);
  tr.diagnostics.reserve(steps);
  tr.times.push_back(initial.t);
  tr.states.push_back(initial);

  // Start-of-step forces of the advanced force profile.
  std::optional<Vec> lN_start, lT_start;
  if (advanced) {
    if (m.prescribed_normal) lN_start = *m.prescribed_normal;
    else if (m.contact_type == ContactType::spring) lN_start = make_state(m, initial.t, initial.q, initial.u).lambda_N;
  }
  Vec prev_mean_T;
  bool have_prev_mean = false;

  Fnn step_net;
  bool have_step_net = false;
  const Vec ones = Vec::Ones(R);

  for (long i = 0; i < steps; ++i) {
    const SystemState& s = tr.states.back();
    StepDiagnostics diag;
    try {
      // Force profile: lambda_k = alpha_k + beta_k lambda_E.
      StageForces alpha{Mat::Zero(c, R), Mat::Zero(c, R)};
      Vec beta_N = ones, beta_T = ones;
      if (advanced && lN_start) {
        alpha.lambda_N = lN_start->replicate(1, R) * (ones - cn).asDiagonal();
        beta_N = cn;
      }
      if (advanced && lT_start) {
        alpha.lambda_T = lT_start->replicate(1, R) * (ones - cn).asDiagonal();
        beta_T = cn;
      }
      const ContactResponse resp = op.contact_response(s, alpha, beta_N, beta_T);

      // Friction coefficient: start-of-step velocity, or a fixed point on the
      // end-of-step velocity for velocity-dependent laws in advanced schemes.
      bool implicit_mu = false;
      if (advanced)
        for (const auto& law : m.friction) implicit_mu = implicit_mu || law.velocity_dependent();
      Vec mu = friction_coefficients(m, s.gamma_T);
      LcpStage st;
      const int sweeps = implicit_mu ? std::max(1, cfg.mu_iterations) : 1;
      for (int it = 0; it < sweeps; ++it) {
        st.lcp = assemble_lcp(m, resp, mu, dt);
        st.sol = lcp_solver.solve(st.lcp.problem, st.attempts);
        if (st.sol.status != LcpStatus::solved)
          throw std::runtime_error("step LCP failed: " + std::string(to_string(st.sol.status)));
        st.ci = decode(st.lcp, st.sol.x, st.sol.y);
        st.mu_iterations = it + 1;
        if (!implicit_mu) break;
        const Vec mu_next = friction_coefficients(m, st.ci.gamma_T);
        const double change = (mu_next - mu).cwiseAbs().maxCoeff();
        mu = mu_next;
        if (change <= 1e-14) break;
      }
      diag.lcp_residual = st.sol.residual;
      diag.lcp_complementarity = lcp_complementarity_error(st.lcp.problem, st.sol.x, st.sol.y);
      diag.lcp_attempts = st.attempts;
      diag.mu_iterations = st.mu_iterations;

      const Vec lN_end = st.ci.Lambda_N / dt, lT_end = st.ci.Lambda_T / dt;
      StageForces forces{alpha.lambda_N + lN_end * beta_N.transpose(), alpha.lambda_T + lT_end * beta_T.transpose()};

      PinnStepResult res = pinn_step(op, s, forces, cfg, have_step_net ? &step_net : nullptr);
      diag.dynamics_residual = res.max_residual;
      diag.train_iterations = res.report.iterations;
      step_net = std::move(res.net);
      have_step_net = true;

      SystemState next = std::move(res.state);
      next.t = initial.t + (i + 1) * dt;
      next.lambda_N = lN_end;
      next.lambda_T = lT_end;
      next.g_N = gap(m, next.q);
      next.gamma_T = tangential_velocity(m, next.u);
      next.regime = classify_regimes(m, next.gamma_T, next.lambda_N);

      if (advanced) {
        lN_start = lN_end;
        // Tangential start extrapolated from the last two step means.
        const Vec mean_T = forces.lambda_T * cfg.tableau.b;
        lT_start = have_prev_mean ? Vec(1.5 * mean_T - 0.5 * prev_mean_T) : mean_T;
        prev_mean_T = mean_T;
        have_prev_mean = true;
      }
      tr.times.push_back(next.t);
      tr.states.push_back(std::move(next));
      tr.diagnostics.push_back(diag);
    } catch (const SimulationError&) {
      throw;
    } catch (const std::exception& e) {
      throw SimulationError(tr.method_tag + ": " + e.what(), i);
    }
  }
  return tr;
}

}  // namespace nspinn
