#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nspinn/lcp.hpp"
#include "nspinn/nn.hpp"

namespace nspinn {

struct LcpPinnConfig {
  std::vector<int> hidden{5, 5, 5};
  ActivationKind hidden_activation{Activation::tanh};
  // Applied to the output layer; keeps x and y nonnegative by construction.
  ActivationKind activation = ActivationKind::modified_relu(0.5, 0.0);
  // Xavier output-layer weights are multiplied by this factor at cold start.
  double output_init_scale = 0.1;
  // Constant network input; empty means ones of length N.
  Vec input_values;
  // Training stops once the residual of the equilibrated problem is <= tol.
  double tol = 1e-22;
  int max_iter = 3000;
  std::uint64_t seed = 1;
  int restarts = 3;
  bool equilibrate = true;
  // Re-solve the complementary basis read off the trained outputs (x_i > y_i)
  // exactly; kept only when it is feasible and lowers the residual.
  bool polish = true;
};

struct LcpPinnResult {
  LcpSolution solution;
  Fnn net;
  TrainReport report;
  double scaled_residual = 0.0;
  int attempts = 0;
  bool warm_start_used = false;  // the accepted network came from the warm start
  bool polished = false;
};

LcpSolution solve_lcp_pinn(const LcpProblem& p, const LcpPinnConfig& cfg);

// Variant with an optional warm-start network of matching shape; falls back
// to cold, reseeded starts when warm training does not converge.
LcpPinnResult solve_lcp_pinn_detailed(const LcpProblem& p, const LcpPinnConfig& cfg,
                                      const Fnn* warm = nullptr);

// Network for an N-dimensional LCP under cfg, Xavier-initialized from seed with
// every output unit starting in the active region of the output ReLU.
Fnn make_lcp_net(int n, const LcpPinnConfig& cfg, std::uint64_t seed);

}  // namespace nspinn
