#pragma once

// Independent oracles used by the tests. None of them call into the solvers
// they check.

#include <cmath>
#include <functional>
#include <optional>
#include <random>

#include "nspinn/contact.hpp"
#include "nspinn/lcp.hpp"
#include "nspinn/nn.hpp"

namespace oracle {

using nspinn::Mat;
using nspinn::Vec;

// Complementary-basis enumeration: for each index set S solve A_SS x_S = -b_S,
// keep the first candidate with x >= 0 and y >= 0.
inline std::optional<std::pair<Vec, Vec>> lcp_enumerate(const Mat& A, const Vec& b, double tol = 1e-12) {
  const int n = static_cast<int>(b.size());
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> S;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) S.push_back(i);
    Vec x = Vec::Zero(n);
    if (!S.empty()) {
      const int k = static_cast<int>(S.size());
      Mat As(k, k);
      Vec bs(k);
      for (int i = 0; i < k; ++i) {
        bs(i) = -b(S[i]);
        for (int j = 0; j < k; ++j) As(i, j) = A(S[i], S[j]);
      }
      Eigen::FullPivLU<Mat> lu(As);
      if (!lu.isInvertible()) continue;
      const Vec xs = lu.solve(bs);
      for (int i = 0; i < k; ++i) x(S[i]) = xs(i);
    }
    const Vec y = A * x + b;
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      const bool in = mask & (1u << i);
      if (x(i) < -tol || y(i) < -tol) ok = false;
      if (in) continue;
      if (std::abs(x(i)) > 0.0) ok = false;
    }
    if (ok) {
      Vec yc = y;
      for (int i : S) yc(i) = 0.0;
      return std::make_pair(x, yc);
    }
  }
  return std::nullopt;
}

// Random symmetric positive-definite LCP of size n.
inline nspinn::LcpProblem random_pd_lcp(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = g(rng);
  nspinn::LcpProblem p;
  p.A = B * B.transpose() + 0.5 * Mat::Identity(n, n);
  p.b.resize(n);
  for (int i = 0; i < n; ++i) p.b(i) = g(rng);
  return p;
}

// Central differences of f at x.
inline Vec central_difference(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  Vec xp = x;
  for (int i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    xp(i) = xi + h;
    const double fp = f(xp);
    xp(i) = xi - h;
    const double fm = f(xp);
    xp(i) = xi;
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Undamped oscillator m x'' + k x = 0.
struct Oscillator {
  double m = 1.0, k = 1.0, x0 = 1.0, v0 = 0.0;
  double omega() const { return std::sqrt(k / m); }
  double x(double t) const { return x0 * std::cos(omega() * t) + v0 / omega() * std::sin(omega() * t); }
  double v(double t) const { return -x0 * omega() * std::sin(omega() * t) + v0 * std::cos(omega() * t); }
};

// 1-DoF oscillator whose single contact never closes: a spring contact with a
// huge initial gap and zero friction. The contact spring is unit stiffness.
inline nspinn::MechModel free_oscillator(double m, double k) {
  nspinn::MechModel md;
  md.name = "free";
  md.M = Mat::Constant(1, 1, m);
  md.Ks = Mat::Constant(1, 1, k);
  md.Cs = Mat::Zero(1, 1);
  md.f_e = Vec::Zero(1);
  md.contact_type = nspinn::ContactType::spring;
  md.k_c = Vec::Constant(1, 1.0);
  md.W_N = Mat::Ones(1, 1);
  md.W_T = Mat::Ones(1, 1);
  md.w_N = Vec::Zero(1);
  md.w_T = Vec::Zero(1);
  md.g0 = Vec::Constant(1, 1e6);
  md.friction = {nspinn::FrictionLaw::constant(0.0)};
  md.validate();
  return md;
}

// Legendre polynomial P_n on [-1, 1] by the three-term recurrence.
inline double legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return p0;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

}  // namespace oracle
