#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nspinn/contact.hpp"
#include "nspinn/lcp.hpp"

namespace nspinn {

enum class Method { conventional, rk4_lcp, single_pinn, dual_pinn, adv_single_pinn, adv_dual_pinn };

std::string method_name(Method m);
std::optional<Method> parse_method(const std::string& s);
bool is_pinn(Method m);
// Tag used in reports and file names, e.g. "adv_dual_pinn_10".
std::string method_tag(Method m, int order);

using LcpSolver = std::function<LcpSolution(const LcpProblem&)>;

LcpSolver pivoting_solver(double tol = kLcpDefaultTol);

// Per-step bookkeeping used by the invariant checks.
struct StepDiagnostics {
  double lcp_complementarity = 0.0;  // on the equilibrated, normalized problem
  double lcp_residual = 0.0;         // residual on the assembled problem
  double dynamics_residual = 0.0;    // PINN step residual (0 for conventional steps)
  int lcp_attempts = 1;
  int train_iterations = 0;
  int mu_iterations = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SystemState> states;
  std::vector<StepDiagnostics> diagnostics;  // one per step, states.size() - 1
  std::string method_tag;
  double dt = 0.0;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, long step)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

// Max violation of the LCP conditions after equilibration and rhs
// normalization; scale-free.
double lcp_complementarity_error(const LcpProblem& p, const Vec& x, const Vec& y);

SystemState step_conventional(const MechModel& m, const SystemState& s, double dt, const LcpSolver& lcp,
                              StepDiagnostics* diag = nullptr);
SystemState step_rk4_lcp(const MechModel& m, const SystemState& s, double dt, const LcpSolver& lcp,
                         StepDiagnostics* diag = nullptr);

struct PinnStepConfig;

struct SimulateOptions {
  double lcp_tol = kLcpDefaultTol;
  // PINN schemes only; null means defaults with the given order.
  const PinnStepConfig* pinn = nullptr;
  int order = 4;
};

Trajectory simulate(const MechModel& m, const SystemState& initial, double t_end, double dt, Method method,
                    const SimulateOptions& opt = {});

// Number of uniform steps covering [t0, t_end].
long step_count(double t0, double t_end, double dt);

}  // namespace nspinn
