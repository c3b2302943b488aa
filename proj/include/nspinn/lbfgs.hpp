#pragma once

#include <cmath>
#include <functional>

#include "nspinn/lcp.hpp"

namespace nspinn {

// Objective: returns f(x) and writes its gradient into g.
using Objective = std::function<double(const Vec& x, Vec& g)>;

struct LbfgsOptions {
  int memory = 10;
  int max_iter = 1000;
  double f_tol = -HUGE_VAL;  // stop once f <= f_tol
  double g_tol = 1e-300; // stop once ||g||_inf <= g_tol
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_linesearch = 40;
};

enum class LbfgsStatus { converged, gradient_small, max_iter, line_search_failed, non_finite };

struct LbfgsResult {
  Vec x;
  double f = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  LbfgsStatus status = LbfgsStatus::max_iter;
  bool non_finite_seen = false;
};

LbfgsResult minimize_lbfgs(const Objective& fn, Vec x0, const LbfgsOptions& opt);

}  // namespace nspinn
