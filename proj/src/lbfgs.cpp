#include "nspinn/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace nspinn {
namespace {

struct Probe {
  double a = 0.0;
  double f = 0.0;
  double d = 0.0;  // directional derivative
  Vec x, g;
};

// Minimizer of the cubic through (a0,f0,d0), (a1,f1,d1); NaN if none.
double cubic_min(double a0, double f0, double d0, double a1, double f1, double d1) {
  const double d1c = d0 + d1 - 3.0 * (f0 - f1) / (a0 - a1);
  const double disc = d1c * d1c - d0 * d1;
  if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), a1 - a0);
  return a1 - (a1 - a0) * (d1 + d2 - d1c) / (d1 - d0 + 2.0 * d2);
}

class LineSearch {
 public:
  LineSearch(const Objective& fn, const Vec& x0, double f0, const Vec& g0, const Vec& dir,
             const LbfgsOptions& opt)
      : fn_(fn), x0_(x0), dir_(dir), opt_(opt) {
    p0_.a = 0.0;
    p0_.f = f0;
    p0_.d = g0.dot(dir);
    p0_.x = x0;
    p0_.g = g0;
  }

  int evaluations = 0;
  bool non_finite = false;

  // Returns true with an accepted probe satisfying the strong Wolfe conditions.
  bool run(double a_init, Probe& out) {
    Probe prev = p0_;
    double a = a_init;
    for (int i = 0; i < opt_.max_linesearch; ++i) {
      Probe cur = eval(a);
      if (!std::isfinite(cur.f)) {
        non_finite = true;
        return zoom(prev, cur, out, true);
      }
      if (cur.f > p0_.f + opt_.c1 * a * p0_.d || (i > 0 && cur.f >= prev.f))
        return zoom(prev, cur, out, false);
      if (std::abs(cur.d) <= -opt_.c2 * p0_.d) {
        out = std::move(cur);
        return true;
      }
      if (cur.d >= 0.0) return zoom(cur, prev, out, false);
      prev = std::move(cur);
      a *= 2.0;
    }
    return false;
  }

 private:
  Probe eval(double a) {
    Probe p;
    p.a = a;
    p.x = x0_ + a * dir_;
    p.g.resize(x0_.size());
    p.f = fn_(p.x, p.g);
    p.d = std::isfinite(p.f) ? p.g.dot(dir_) : std::numeric_limits<double>::quiet_NaN();
    ++evaluations;
    return p;
  }

  bool zoom(Probe lo, Probe hi, Probe& out, bool hi_bad) {
    for (int i = 0; i < opt_.max_linesearch; ++i) {
      const double width = hi.a - lo.a;
      if (std::abs(width) <= 1e-16 * std::max(1.0, std::abs(lo.a))) break;
      double a = hi_bad ? std::numeric_limits<double>::quiet_NaN()
                        : cubic_min(lo.a, lo.f, lo.d, hi.a, hi.f, hi.d);
      const double a_lo = lo.a + 0.1 * width, a_hi = hi.a - 0.1 * width;
      if (!std::isfinite(a) || (a - a_lo) * (a - a_hi) > 0.0) a = lo.a + 0.5 * width;
      Probe cur = eval(a);
      if (!std::isfinite(cur.f)) {
        non_finite = true;
        hi = std::move(cur);
        hi_bad = true;
        continue;
      }
      if (cur.f > p0_.f + opt_.c1 * a * p0_.d || cur.f >= lo.f) {
        hi = std::move(cur);
        hi_bad = false;
      } else {
        if (std::abs(cur.d) <= -opt_.c2 * p0_.d) {
          out = std::move(cur);
          return true;
        }
        if (cur.d * (hi.a - lo.a) >= 0.0) {
          hi = std::move(lo);
          hi_bad = false;
        }
        lo = std::move(cur);
      }
    }
    // Fall back to the best sufficient-decrease point found, if any.
    if (lo.a > 0.0 && lo.f < p0_.f) {
      out = std::move(lo);
      return true;
    }
    return false;
  }

  const Objective& fn_;
  const Vec& x0_;
  const Vec& dir_;
  const LbfgsOptions& opt_;
  Probe p0_;
};

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& fn, Vec x0, const LbfgsOptions& opt) {
  LbfgsResult res;
  const Eigen::Index n = x0.size();
  Vec g(n);
  double f = fn(x0, g);
  res.evaluations = 1;
  res.x = x0;
  res.f = f;
  if (!std::isfinite(f)) {
    res.status = LbfgsStatus::non_finite;
    return res;
  }

  std::deque<Vec> S, Y;
  std::deque<double> rho;
  Vec x = std::move(x0);
  bool saw_non_finite = false;

  for (int it = 0;; ++it) {
    res.grad_norm = n ? g.cwiseAbs().maxCoeff() : 0.0;
    if (f <= opt.f_tol) {
      res.status = LbfgsStatus::converged;
      break;
    }
    if (res.grad_norm <= opt.g_tol) {
      res.status = LbfgsStatus::gradient_small;
      break;
    }
    if (it >= opt.max_iter) {
      res.status = LbfgsStatus::max_iter;
      break;
    }

    // Two-loop recursion.
    Vec q = -g;
    const int m = static_cast<int>(S.size());
    std::vector<double> alpha(m);
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho[i] * S[i].dot(q);
      q -= alpha[i] * Y[i];
    }
    double a_init = 1.0;
    if (m > 0) {
      q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
    } else {
      a_init = std::min(1.0, 1.0 / std::max(g.norm(), 1e-300));
    }
    for (int i = 0; i < m; ++i) {
      const double beta = rho[i] * Y[i].dot(q);
      q += (alpha[i] - beta) * S[i];
    }
    if (q.dot(g) >= 0.0) {
      q = -g;
      a_init = std::min(1.0, 1.0 / std::max(g.norm(), 1e-300));
      S.clear(); Y.clear(); rho.clear();
    }

    LineSearch ls(fn, x, f, g, q, opt);
    Probe acc;
    bool ok = ls.run(a_init, acc);
    res.evaluations += ls.evaluations;
    saw_non_finite = saw_non_finite || ls.non_finite;
    if (!ok && !S.empty()) {
      // Retry once along steepest descent with a fresh memory.
      S.clear(); Y.clear(); rho.clear();
      q = -g;
      LineSearch sd(fn, x, f, g, q, opt);
      ok = sd.run(std::min(1.0, 1.0 / std::max(g.norm(), 1e-300)), acc);
      res.evaluations += sd.evaluations;
      saw_non_finite = saw_non_finite || sd.non_finite;
    }
    if (!ok || !(acc.f <= f)) {
      res.status = saw_non_finite ? LbfgsStatus::non_finite : LbfgsStatus::line_search_failed;
      break;
    }

    Vec s = acc.x - x;
    Vec y = acc.g - g;
    const double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm() && sy > 0.0) {
      if (static_cast<int>(S.size()) == opt.memory) {
        S.pop_front(); Y.pop_front(); rho.pop_front();
      }
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
    }
    x = std::move(acc.x);
    g = std::move(acc.g);
    f = acc.f;
    res.iterations = it + 1;
  }
  res.x = std::move(x);
  res.f = f;
  res.non_finite_seen = saw_non_finite;
  return res;
}

}  // namespace nspinn
