#include "nspinn/lcp.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace nspinn {

bool LcpProblem::well_formed() const {
  return A.rows() == A.cols() && A.rows() == b.size() && A.allFinite() && b.allFinite();
}

std::string_view to_string(LcpStatus s) {
  switch (s) {
    case LcpStatus::solved: return "solved";
    case LcpStatus::ray_termination: return "ray_termination";
    case LcpStatus::max_iter: return "max_iter";
    case LcpStatus::not_converged: return "not_converged";
  }
  return "unknown";
}

double lcp_residual(const LcpProblem& p, const Vec& x, const Vec& y) {
  if (x.size() != p.b.size() || y.size() != p.b.size() || p.A.rows() != p.b.size())
    throw std::invalid_argument("lcp_residual: dimension mismatch");
  const Vec f = y - p.A * x - p.b;
  const Vec r = x.cwiseProduct(y);
  return (f.squaredNorm() + r.squaredNorm()) / static_cast<double>(p.b.size());
}

bool satisfies_lcp(const LcpProblem& p, const Vec& x, const Vec& y, double tol) {
  if (x.size() != p.b.size() || y.size() != p.b.size()) return false;
  if (x.size() == 0) return true;
  if (x.minCoeff() < -tol || y.minCoeff() < -tol) return false;
  if (x.cwiseProduct(y).cwiseAbs().maxCoeff() > tol) return false;
  // Row i of the residual is judged against the magnitude of its terms, so
  // rows scaled by 1/dt^2 are not held to an unreachable absolute bound.
  const Vec f = (y - p.A * x - p.b).cwiseAbs();
  const Vec mag = (p.A.cwiseAbs() * x.cwiseAbs() + p.b.cwiseAbs()).cwiseMax(1.0);
  return (f.array() <= tol * mag.array()).all();
}

LcpScaling LcpScaling::compute(const LcpProblem& p, bool equilibrate) {
  const int n = p.size();
  LcpScaling s;
  s.row = Vec::Ones(n);
  s.col = Vec::Ones(n);
  if (equilibrate && n > 0) {
    Mat A = p.A;
    for (int it = 0; it < 30; ++it) {
      for (int i = 0; i < n; ++i) {
        const double m = A.row(i).cwiseAbs().maxCoeff();
        const double f = m > 0.0 ? 1.0 / std::sqrt(m) : 1.0;
        s.row(i) *= f;
        A.row(i) *= f;
      }
      for (int j = 0; j < n; ++j) {
        const double m = A.col(j).cwiseAbs().maxCoeff();
        const double f = m > 0.0 ? 1.0 / std::sqrt(m) : 1.0;
        s.col(j) *= f;
        A.col(j) *= f;
      }
    }
  }
  const double bmax = n > 0 ? s.row.cwiseProduct(p.b).cwiseAbs().maxCoeff() : 0.0;
  s.rhs = bmax > 0.0 ? bmax : 1.0;
  return s;
}

LcpProblem LcpScaling::apply(const LcpProblem& p) const {
  LcpProblem q;
  q.A = row.asDiagonal() * p.A * col.asDiagonal();
  q.b = row.cwiseProduct(p.b) / rhs;
  return q;
}

void LcpScaling::map(const Vec& xs, const Vec& ys, Vec& x, Vec& y) const {
  x = rhs * col.cwiseProduct(xs);
  y = rhs * ys.cwiseQuotient(row);
}

namespace {

// Tableau rows hold  I w - A z - e z0 = b  in the current basis. Columns:
// [0, n) w, [n, 2n) z, 2n z0, 2n+1 rhs.
struct Tableau {
  int n;
  Mat T;
  std::vector<int> basis;

  explicit Tableau(const LcpProblem& p) : n(p.size()), T(Mat::Zero(n, 2 * n + 2)), basis(n) {
    T.leftCols(n).setIdentity();
    T.middleCols(n, n) = -p.A;
    T.col(2 * n).setConstant(-1.0);
    T.col(2 * n + 1) = p.b;
    for (int i = 0; i < n; ++i) basis[i] = i;
  }

  int rhs() const { return 2 * n + 1; }

  void pivot(int row, int col) {
    T.row(row) /= T(row, col);
    for (int i = 0; i < n; ++i) {
      if (i == row) continue;
      const double f = T(i, col);
      if (f != 0.0) T.row(i) -= f * T.row(row);
    }
    basis[row] = col;
  }

  // Lexicographic minimum ratio over rows with positive pivot entries. The
  // w-columns carry B^{-1}, which makes every comparison strict.
  int ratio_test(int col, int z0_col) const {
    double colmax = T.col(col).cwiseAbs().maxCoeff();
    const double eps = 1e-12 * (1.0 + colmax);
    std::vector<int> cand;
    for (int i = 0; i < n; ++i)
      if (T(i, col) > eps) cand.push_back(i);
    if (cand.empty()) return -1;
    auto key = [&](int i, int k) {
      return k == 0 ? T(i, rhs()) / T(i, col) : T(i, k - 1) / T(i, col);
    };
    for (int k = 0; k <= n && cand.size() > 1; ++k) {
      double best = key(cand[0], k);
      for (int i : cand) best = std::min(best, key(i, k));
      const double scale = 1e-12 * (1.0 + std::abs(best));
      std::vector<int> keep;
      for (int i : cand)
        if (key(i, k) <= best + scale) keep.push_back(i);
      cand.swap(keep);
      if (k == 0) {
        for (int i : cand)
          if (basis[i] == z0_col) return i;
      }
    }
    return cand.front();
  }
};

}  // namespace

bool solve_principal(const LcpProblem& p, const std::vector<int>& basic, Vec& x, Vec& y, double tol) {
  const int n = p.size();
  std::vector<int> idx;
  for (int i = 0; i < n; ++i)
    if (basic[i]) idx.push_back(i);
  Vec xr = Vec::Zero(n);
  if (!idx.empty()) {
    const int m = static_cast<int>(idx.size());
    Mat Aa(m, m);
    Vec ba(m);
    for (int r = 0; r < m; ++r) {
      ba(r) = p.b(idx[r]);
      for (int c = 0; c < m; ++c) Aa(r, c) = p.A(idx[r], idx[c]);
    }
    Eigen::FullPivLU<Mat> lu(Aa);
    if (!lu.isInvertible()) return false;
    const Vec xa = lu.solve(-ba);
    if (!xa.allFinite()) return false;
    for (int r = 0; r < m; ++r) xr(idx[r]) = xa(r);
  }
  Vec yr = p.A * xr + p.b;
  for (int i : idx) yr(i) = 0.0;
  if (n > 0 && (xr.minCoeff() < -tol || yr.minCoeff() < -tol)) return false;
  x = xr.cwiseMax(0.0);
  y = yr.cwiseMax(0.0);
  return true;
}

LcpSolution solve_pivoting(const LcpProblem& p, double tol, int max_pivots) {
  if (!p.well_formed()) throw std::invalid_argument("solve_pivoting: malformed problem");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_pivoting: tol must be positive");
  const int n = p.size();
  if (max_pivots <= 0) max_pivots = 50 * (n + 1) * (n + 1);

  LcpSolution sol;
  sol.x = Vec::Zero(n);
  sol.y = p.b;
  if (n == 0 || p.b.minCoeff() >= 0.0) {
    sol.status = LcpStatus::solved;
    sol.residual = lcp_residual(p, sol.x, sol.y);
    return sol;
  }

  // Pivot on the equilibrated problem; rows scaled by 1/dt^2 otherwise swamp
  // the pivot threshold of the others.
  const LcpScaling sc = LcpScaling::compute(p, true);
  Tableau tab(sc.apply(p));
  const int z0 = 2 * n;
  auto complement = [n](int v) { return v < n ? v + n : v - n; };

  // Initial pivot: z0 enters, the most negative rhs row leaves.
  int row = 0;
  for (int i = 1; i < n; ++i)
    if (tab.T(i, tab.rhs()) < tab.T(row, tab.rhs())) row = i;
  int leaving = tab.basis[row];
  tab.pivot(row, z0);
  int pivots = 1;
  bool done = false;

  while (!done) {
    if (pivots >= max_pivots) {
      sol.status = LcpStatus::max_iter;
      break;
    }
    const int entering = complement(leaving);
    row = tab.ratio_test(entering, z0);
    if (row < 0) {
      sol.status = LcpStatus::ray_termination;
      break;
    }
    leaving = tab.basis[row];
    tab.pivot(row, entering);
    ++pivots;
    if (leaving == z0) done = true;
  }
  sol.iterations = pivots;

  if (done) {
    std::vector<int> zbasic(n, 0);
    Vec x = Vec::Zero(n), y = Vec::Zero(n);
    for (int i = 0; i < n; ++i) {
      const int v = tab.basis[i];
      const double val = tab.T(i, tab.rhs());
      if (v < n) y(v) = val;
      else if (v < 2 * n) {
        x(v - n) = val;
        zbasic[v - n] = 1;
      }
    }
    sc.map(Vec(x), Vec(y), x, y);
    if (!solve_principal(p, zbasic, x, y, tol)) {
      x = x.cwiseMax(0.0);
      y = y.cwiseMax(0.0);
    }
    sol.x = x;
    sol.y = y;
    sol.status = satisfies_lcp(p, x, y, tol) ? LcpStatus::solved : LcpStatus::not_converged;
  }
  sol.residual = lcp_residual(p, sol.x, sol.y);
  return sol;
}

}  // namespace nspinn
