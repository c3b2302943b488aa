#include "nspinn/irk.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nspinn {
namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

ButcherTableau irk_coefficients(int R) {
  if (R < 1 || R > 100) throw std::invalid_argument("irk_coefficients: R must be in [1, 100]");
  Vec x(R), w(R);
  for (int i = 0; i < R; ++i) {
    // Roots in ascending order.
    double z = -std::cos(std::numbers::pi * (i + 0.75) / (R + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(R, z, p, dp);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    legendre(R, z, p, dp);
    x(i) = z;
    w(i) = 2.0 / ((1.0 - z * z) * dp * dp);
  }

  ButcherTableau t;
  t.order = R;
  t.c = (x.array() + 1.0) / 2.0;
  t.b = w / 2.0;

  // Barycentric weights on [-1, 1]; factors of 2 keep them O(1).
  Vec bw(R);
  for (int j = 0; j < R; ++j) {
    double prod = 1.0;
    for (int k = 0; k < R; ++k)
      if (k != j) prod *= 2.0 * (x(j) - x(k));
    bw(j) = 1.0 / prod;
  }
  auto lagrange = [&](double s, Vec& out) {
    for (int j = 0; j < R; ++j) {
      if (s == x(j)) {
        out.setZero();
        out(j) = 1.0;
        return;
      }
    }
    double den = 0.0;
    for (int j = 0; j < R; ++j) {
      out(j) = bw(j) / (s - x(j));
      den += out(j);
    }
    out /= den;
  };

  // a_kr = integral of l_r over [0, c_k]; the R-point rule is exact for the
  // degree R-1 basis polynomials.
  t.a = Mat::Zero(R, R);
  Vec l(R);
  for (int k = 0; k < R; ++k) {
    const double ck = t.c(k);
    for (int q = 0; q < R; ++q) {
      const double s = ck * t.c(q);     // node on [0, c_k]
      lagrange(2.0 * s - 1.0, l);
      t.a.row(k) += ck * t.b(q) * l.transpose();
    }
  }
  return t;
}

}  // namespace nspinn
