#pragma once

#include <Eigen/Dense>
#include <string_view>
#include <vector>

namespace nspinn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Find x, y >= 0 with y = A x + b and x^T y = 0.
struct LcpProblem {
  Mat A;
  Vec b;

  int size() const { return static_cast<int>(b.size()); }
  bool well_formed() const;
};

enum class LcpStatus { solved, ray_termination, max_iter, not_converged };

std::string_view to_string(LcpStatus s);

struct LcpSolution {
  Vec x;
  Vec y;
  double residual = 0.0;
  LcpStatus status = LcpStatus::not_converged;
  int iterations = 0;
};

// Row/column equilibration plus rhs normalization. The scaled problem has the
// same complementarity pattern; map() recovers (x, y) of the original.
struct LcpScaling {
  Vec row, col;
  double rhs = 1.0;

  static LcpScaling compute(const LcpProblem& p, bool equilibrate);
  LcpProblem apply(const LcpProblem& p) const;
  void map(const Vec& xs, const Vec& ys, Vec& x, Vec& y) const;
};

constexpr double kLcpDefaultTol = 1e-9;

// Lemke's complementary pivoting with covering vector e and a lexicographic
// minimum-ratio rule, run on the equilibrated problem.
LcpSolution solve_pivoting(const LcpProblem& p, double tol = kLcpDefaultTol, int max_pivots = 0);

// Solves A_SS x_S = -b_S for the index set S = {i : basic[i]} and sets
// y = A x + b off S. Succeeds, writing clamped (x, y), when both are >= -tol.
bool solve_principal(const LcpProblem& p, const std::vector<int>& basic, Vec& x, Vec& y, double tol);

// L = (sum f_i^2 + sum r_i^2) / N with f = y - A x - b and r = x .* y.
double lcp_residual(const LcpProblem& p, const Vec& x, const Vec& y);

// Checks the solved-state invariants of (x, y) at tolerance tol. The equation
// residual is relative per row to max(1, |A||x| + |b|).
bool satisfies_lcp(const LcpProblem& p, const Vec& x, const Vec& y, double tol);

}  // namespace nspinn
