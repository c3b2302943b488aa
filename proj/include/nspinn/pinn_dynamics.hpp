#pragma once

#include <cstdint>
#include <vector>

#include "nspinn/contact.hpp"
#include "nspinn/irk.hpp"
#include "nspinn/lcp_pinn.hpp"
#include "nspinn/nn.hpp"
#include "nspinn/time_stepping.hpp"

namespace nspinn {

enum class PinnScheme { single, dual, advanced_single, advanced_dual };

PinnScheme scheme_of(Method m);
Method method_of(PinnScheme s);
bool is_advanced(PinnScheme s);
bool is_dual(PinnScheme s);

struct PinnStepConfig {
  ButcherTableau tableau = irk_coefficients(4);
  std::vector<int> hidden = std::vector<int>(7, 20);
  ActivationKind activation{Activation::tanh};
  PinnScheme scheme = PinnScheme::single;
  // Step converges when every normalized reconstruction residual is <= tol.
  double tol = 1e-10;
  int max_iter = 3000;
  std::uint64_t seed = 1;
  int restarts = 3;
  bool warm_start = true;
  // LCP settings: pivoting tolerance and the network solver of the dual schemes.
  double lcp_tol = kLcpDefaultTol;
  LcpPinnConfig lcp_pinn{};
  // Fixed-point sweeps for velocity-dependent friction in advanced schemes.
  int mu_iterations = 30;

  static PinnStepConfig defaults(int order);
};

// Forces at the IRK nodes, one column per stage.
struct StageForces {
  Mat lambda_N;
  Mat lambda_T;
};

// Column k = prev + c_k (curr - prev).
Mat interpolate_forces(const Vec& prev, const Vec& curr, const Vec& c);
StageForces interpolate_forces(const Vec& lN_prev, const Vec& lN_curr, const Vec& lT_prev, const Vec& lT_curr,
                               const Vec& c);
StageForces constant_forces(const Vec& lN, const Vec& lT, int stages);

// Linear collocation operator of one step, shared by the step network loss and
// the contact response of the PINN schemes. For outputs z = [V_1..V_R, V_E]
// the normalized residuals are r = (P z - d) / s.
class IrkStepOperator {
 public:
  IrkStepOperator(const MechModel& m, const ButcherTableau& tab, double dt);

  const Mat& P() const { return P_; }
  int n_dof() const { return n_; }
  int stages() const { return R_; }
  double dt() const { return dt_; }
  const ButcherTableau& tableau() const { return tab_; }

  Vec rhs(const Vec& q, const Vec& u, const StageForces& f) const;
  // Exact collocation solution z* = P^{-1} d.
  Vec solve(const Vec& q, const Vec& u, const StageForces& f) const;
  // End state from outputs z.
  void end_state(const Vec& q, const Vec& z, Vec& qE, Vec& uE) const;

  // End-of-step contact response when the stage forces are
  // alpha + beta_k lambda_E, lambda_E being the unknown end-of-step force.
  ContactResponse contact_response(const SystemState& s, const StageForces& alpha, const Vec& beta_N,
                                   const Vec& beta_T) const;

 private:
  Vec force_rhs(const StageForces& f) const;

  MechModel m_;
  ButcherTableau tab_;
  double dt_;
  int n_, R_;
  Mat Minv_;
  Mat P_;
  Eigen::PartialPivLU<Mat> lu_;
};

struct PinnStepResult {
  SystemState state;  // q, u, t set; forces and contact fields filled by the caller
  Fnn net;
  TrainReport report;
  double max_residual = 0.0;
  int attempts = 0;
};

// Trains the step network so that the R + 1 reconstructions of u agree and
// returns the state at t + dt read from its outputs.
PinnStepResult pinn_step(const MechModel& m, const SystemState& s, double dt, const StageForces& forces,
                         const PinnStepConfig& cfg, const Fnn* warm = nullptr);
PinnStepResult pinn_step(const IrkStepOperator& op, const SystemState& s, const StageForces& forces,
                         const PinnStepConfig& cfg, const Fnn* warm = nullptr);

Fnn make_step_net(int n_dof, const PinnStepConfig& cfg, std::uint64_t seed);

Trajectory pinn_simulate(const MechModel& m, const SystemState& initial, double t_end, double dt,
                         const PinnStepConfig& cfg);

}  // namespace nspinn
