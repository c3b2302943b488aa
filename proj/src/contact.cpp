#include "nspinn/contact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace nspinn {

FrictionLaw FrictionLaw::constant(double mu) {
  FrictionLaw l;
  l.kind = FrictionKind::constant;
  l.mu_s = l.mu_d = mu;
  return l;
}

FrictionLaw FrictionLaw::rational(double mu_s, double delta) {
  FrictionLaw l;
  l.kind = FrictionKind::stribeck_rational;
  l.mu_s = mu_s;
  l.mu_d = 0.0;
  l.delta = delta;
  return l;
}

FrictionLaw FrictionLaw::exponential(double mu_s, double mu_d, double alpha) {
  FrictionLaw l;
  l.kind = FrictionKind::stribeck_exponential;
  l.mu_s = mu_s;
  l.mu_d = mu_d;
  l.alpha = alpha;
  return l;
}

bool FrictionLaw::velocity_dependent() const {
  switch (kind) {
    case FrictionKind::constant: return false;
    case FrictionKind::stribeck_rational: return delta != 0.0;
    case FrictionKind::stribeck_exponential: return alpha != 0.0 && mu_s != mu_d;
  }
  return false;
}

bool FrictionLaw::valid() const {
  const bool finite = std::isfinite(mu_s) && std::isfinite(mu_d) && std::isfinite(delta) && std::isfinite(alpha);
  return finite && mu_s >= mu_d && mu_d >= 0.0 && delta >= 0.0 && alpha >= 0.0;
}

double friction_coefficient(const FrictionLaw& law, double v_rel) {
  const double v = std::abs(v_rel);
  switch (law.kind) {
    case FrictionKind::constant: return law.mu_s;
    case FrictionKind::stribeck_rational: return law.mu_s / (1.0 + law.delta * v);
    case FrictionKind::stribeck_exponential:
      if (law.printed_exponential) return law.mu_s + (law.mu_s - law.mu_d) * std::exp(-law.alpha * v);
      return law.mu_d + (law.mu_s - law.mu_d) * std::exp(-law.alpha * v);
  }
  return 0.0;
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::stick: return "stick";
    case Regime::slip: return "slip";
    case Regime::separated: return "separated";
  }
  return "unknown";
}

std::string_view to_string(LcpLayout l) {
  switch (l) {
    case LcpLayout::rigid: return "rigid";
    case LcpLayout::spring: return "spring";
    case LcpLayout::tangential: return "tangential";
  }
  return "unknown";
}

void MechModel::validate() const {
  const int n = n_dof(), c = n_contacts();
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("MechModel: ") + what); };
  if (n == 0 || M.cols() != n) fail("M must be square and non-empty");
  if (Ks.rows() != n || Ks.cols() != n || Cs.rows() != n || Cs.cols() != n) fail("Ks/Cs shape");
  if (f_e.size() != n) fail("f_e length");
  if (W_N.rows() != n || W_T.rows() != n || W_N.cols() != c) fail("W_N/W_T shape");
  if (w_N.size() != c || w_T.size() != c || g0.size() != c) fail("drift/offset length");
  if (static_cast<int>(friction.size()) != c) fail("one friction law per contact");
  for (const auto& l : friction)
    if (!l.valid()) fail("friction law parameters");
  if (contact_type == ContactType::spring && (k_c.size() != c || (c > 0 && k_c.minCoeff() < 0.0)))
    fail("k_c must be a nonnegative vector per contact");
  if (prescribed_normal && prescribed_normal->size() != c) fail("prescribed normal length");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * M.cwiseAbs().maxCoeff()) fail("M not symmetric");
  Eigen::LLT<Mat> llt(M);
  if (llt.info() != Eigen::Success) fail("M not positive definite");
}

Vec gap(const MechModel& m, const Vec& q) { return m.W_N.transpose() * q + m.g0; }

Vec tangential_velocity(const MechModel& m, const Vec& u) { return m.W_T.transpose() * u + m.w_T; }

Vec h_vector(const MechModel& m, const Vec& q, const Vec& u) {
  if (q.size() != m.n_dof() || u.size() != m.n_dof()) throw std::invalid_argument("h_vector: dimension");
  return -m.Cs * u - m.Ks * q + m.f_e;
}

std::vector<Regime> classify_regimes(const MechModel& m, const Vec& gamma_T, const Vec& lambda_N, double v_eps) {
  std::vector<Regime> r(m.n_contacts());
  for (int i = 0; i < m.n_contacts(); ++i) {
    if (lambda_N(i) <= kSeparationForceEps) r[i] = Regime::separated;
    else if (std::abs(gamma_T(i)) <= v_eps) r[i] = Regime::stick;
    else r[i] = Regime::slip;
  }
  return r;
}

SystemState make_state(const MechModel& m, double t, const Vec& q, const Vec& u) {
  SystemState s;
  s.t = t;
  s.q = q;
  s.u = u;
  const int c = m.n_contacts();
  s.g_N = gap(m, q);
  s.gamma_T = tangential_velocity(m, u);
  s.lambda_T = Vec::Zero(c);
  if (m.prescribed_normal) {
    s.lambda_N = *m.prescribed_normal;
  } else if (m.contact_type == ContactType::spring) {
    s.lambda_N = m.k_c.cwiseProduct((-s.g_N).cwiseMax(0.0));
  } else {
    s.lambda_N = Vec::Zero(c);
  }
  s.regime = classify_regimes(m, s.gamma_T, s.lambda_N);
  return s;
}

ContactResponse euler_response(const MechModel& m, const SystemState& s, double dt) {
  Eigen::LDLT<Mat> Minv(m.M);
  const Vec h = h_vector(m, s.q, s.u);
  const Vec Mh = Minv.solve(h);
  const Mat MWN = Minv.solve(m.W_N);
  const Mat MWT = Minv.solve(m.W_T);
  ContactResponse r;
  r.g_free = gap(m, s.q) + m.W_N.transpose() * (s.u * dt + Mh * dt * dt) + m.w_N * dt;
  r.gamma_free = tangential_velocity(m, s.u) + m.W_T.transpose() * Mh * dt;
  r.G_NN = m.W_N.transpose() * MWN;
  r.G_NT = m.W_N.transpose() * MWT;
  r.G_TN = m.W_T.transpose() * MWN;
  r.G_TT = m.W_T.transpose() * MWT;
  return r;
}

Vec friction_coefficients(const MechModel& m, const Vec& gamma_T) {
  Vec mu(m.n_contacts());
  for (int i = 0; i < m.n_contacts(); ++i) mu(i) = friction_coefficient(m.friction[i], gamma_T(i));
  return mu;
}

AssembledLcp assemble_lcp(const MechModel& m, const ContactResponse& r, const Vec& mu, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("assemble_lcp: dt must be positive");
  const int c = m.n_contacts();
  const Mat I = Mat::Identity(c, c);
  const Mat Mu = mu.asDiagonal();
  AssembledLcp out;
  out.n_contacts = c;
  out.mu = mu;
  out.dt = dt;

  if (m.prescribed_normal) {
    // Normal impulse is known; only the tangential blocks remain.
    const Vec LN = *m.prescribed_normal * dt;
    out.layout = LcpLayout::tangential;
    out.Lambda_N_prescribed = LN;
    Mat A = Mat::Zero(2 * c, 2 * c);
    A.block(0, 0, c, c) = r.G_TT;
    A.block(0, c, c, c) = I;
    A.block(c, 0, c, c) = -I;
    Vec b(2 * c);
    b.head(c) = -(r.G_TN * LN + r.G_TT * Mu * LN) - r.gamma_free;
    b.tail(c) = 2.0 * Mu * LN;
    out.problem = {A, b};
    return out;
  }

  Mat A = Mat::Zero(3 * c, 3 * c);
  Vec b = Vec::Zero(3 * c);
  if (m.contact_type == ContactType::rigid) {
    out.layout = LcpLayout::rigid;
    A.block(0, 0, c, c) = r.G_NN + r.G_NT * Mu;
    A.block(0, c, c, c) = -r.G_NT;
    b.head(c) = r.g_free / dt;
  } else {
    out.layout = LcpLayout::spring;
    const Mat Kc = m.k_c.asDiagonal();
    A.block(0, 0, c, c) = I / (dt * dt) + Kc * r.G_NN + Kc * r.G_NT * Mu;
    A.block(0, c, c, c) = -Kc * r.G_NT;
    b.head(c) = Kc * r.g_free / dt;
  }
  A.block(c, 0, c, c) = -(r.G_TN + r.G_TT * Mu);
  A.block(c, c, c, c) = r.G_TT;
  A.block(c, 2 * c, c, c) = I;
  A.block(2 * c, 0, c, c) = 2.0 * Mu;
  A.block(2 * c, c, c, c) = -I;
  b.segment(c, c) = -r.gamma_free;
  out.problem = {A, b};
  return out;
}

AssembledLcp assemble_rigid_lcp(const MechModel& m, const SystemState& s, double dt) {
  if (m.contact_type != ContactType::rigid) throw std::invalid_argument("assemble_rigid_lcp: spring model");
  return assemble_lcp(m, euler_response(m, s, dt), friction_coefficients(m, s.gamma_T), dt);
}

AssembledLcp assemble_spring_lcp(const MechModel& m, const SystemState& s, double dt) {
  if (m.contact_type != ContactType::spring) throw std::invalid_argument("assemble_spring_lcp: rigid model");
  return assemble_lcp(m, euler_response(m, s, dt), friction_coefficients(m, s.gamma_T), dt);
}

AssembledLcp assemble_step_lcp(const MechModel& m, const SystemState& s, double dt) {
  return m.contact_type == ContactType::rigid ? assemble_rigid_lcp(m, s, dt) : assemble_spring_lcp(m, s, dt);
}

ContactImpulses decode(const AssembledLcp& lcp, const Vec& x, const Vec& y) {
  const int c = lcp.n_contacts;
  ContactImpulses ci;
  if (lcp.layout == LcpLayout::tangential) {
    ci.Lambda_N = lcp.Lambda_N_prescribed;
    ci.Lambda_L = x.head(c);
    ci.gamma_R = x.tail(c);
    ci.gamma_L = y.head(c);
    ci.Lambda_R = y.tail(c);
  } else {
    ci.Lambda_N = x.head(c);
    ci.Lambda_L = x.segment(c, c);
    ci.gamma_R = x.tail(c);
    ci.gamma_L = y.segment(c, c);
    ci.Lambda_R = y.tail(c);
  }
  ci.Lambda_T = lcp.mu.cwiseProduct(ci.Lambda_N) - ci.Lambda_L;
  ci.gamma_T = ci.gamma_R - ci.gamma_L;
  return ci;
}

Mat effective_stiffness(const MechModel& m, double mu) {
  Mat K = m.Ks;
  if (m.contact_type == ContactType::spring) {
    const Mat Kc = m.k_c.asDiagonal();
    K += m.W_N * Kc * m.W_N.transpose() + mu * m.W_T * Kc * m.W_N.transpose();
  }
  return K;
}

std::vector<std::complex<double>> eigen_stability(const MechModel& m, double mu) {
  const int n = m.n_dof();
  Eigen::LDLT<Mat> Minv(m.M);
  if (Minv.info() != Eigen::Success || !(Minv.vectorD().array() > 0.0).all())
    throw std::invalid_argument("eigen_stability: singular mass matrix");
  Mat S = Mat::Zero(2 * n, 2 * n);
  S.block(0, n, n, n) = Mat::Identity(n, n);
  S.block(n, 0, n, n) = -Minv.solve(effective_stiffness(m, mu));
  S.block(n, n, n, n) = -Minv.solve(m.Cs);
  Eigen::EigenSolver<Mat> es(S, false);
  std::vector<std::complex<double>> ev(es.eigenvalues().data(), es.eigenvalues().data() + 2 * n);
  std::sort(ev.begin(), ev.end(), [](auto a, auto b) {
    return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
  });
  return ev;
}

namespace {

double max_real(const std::vector<std::complex<double>>& ev) {
  double r = -INFINITY;
  for (auto e : ev) r = std::max(r, e.real());
  return r;
}

bool unstable(const MechModel& m, double mu) {
  const auto ev = eigen_stability(m, mu);
  double scale = 0.0;
  for (auto e : ev) scale = std::max(scale, std::abs(e));
  return max_real(ev) > 1e-9 * std::max(scale, 1.0);
}

}  // namespace

EigenSweep eigen_sweep(const MechModel& m, double mu_min, double mu_max, int steps) {
  if (steps < 1 || !(mu_max >= mu_min)) throw std::invalid_argument("eigen_sweep: bad range");
  EigenSweep sw;
  for (int i = 0; i <= steps; ++i) {
    const double mu = mu_min + (mu_max - mu_min) * i / steps;
    EigenSweepPoint p;
    p.mu = mu;
    p.eig = eigen_stability(m, mu);
    p.max_real = max_real(p.eig);
    sw.points.push_back(std::move(p));
  }
  for (int i = 0; i <= steps; ++i) {
    if (!unstable(m, sw.points[i].mu)) continue;
    if (i == 0) {
      sw.mu_critical = sw.points[0].mu;
      break;
    }
    double lo = sw.points[i - 1].mu, hi = sw.points[i].mu;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (unstable(m, mid) ? hi : lo) = mid;
    }
    sw.mu_critical = hi;
    break;
  }
  return sw;
}

MechModel model_one(const Model1Params& p) {
  MechModel m;
  m.name = "model1";
  m.M = Mat::Constant(1, 1, p.m);
  m.Ks = Mat::Constant(1, 1, p.k);
  m.Cs = Mat::Constant(1, 1, p.c);
  m.f_e = Vec::Zero(1);
  m.contact_type = ContactType::rigid;
  m.W_N = Mat::Zero(1, 1);
  m.W_T = Mat::Ones(1, 1);
  m.w_N = Vec::Zero(1);
  m.w_T = Vec::Constant(1, -p.v0);
  m.g0 = Vec::Zero(1);
  m.friction = {p.law};
  m.prescribed_normal = Vec::Constant(1, p.F_n);
  m.validate();
  return m;
}

MechModel model_two(const Model2Params& p) {
  MechModel m;
  m.name = "model2";
  m.M = p.m * Mat::Identity(2, 2);
  m.Ks.resize(2, 2);
  m.Ks << p.k1 + p.k3 / 2.0, -p.k3 / 2.0, -p.k3 / 2.0, p.k3 / 2.0;
  m.Cs = Mat::Zero(2, 2);
  m.Cs(0, 0) = p.c1;
  m.Cs(1, 1) = p.c2;
  m.f_e = Vec::Zero(2);
  m.f_e(1) = -p.F_p;
  m.contact_type = ContactType::spring;
  m.k_c = Vec::Constant(1, p.kc);
  m.W_N = Mat::Zero(2, 1);
  m.W_N(1, 0) = 1.0;
  m.W_T = Mat::Zero(2, 1);
  m.W_T(0, 0) = 1.0;
  m.w_N = Vec::Zero(1);
  m.w_T = Vec::Constant(1, -p.v0);
  m.g0 = Vec::Zero(1);
  m.friction = {p.law};
  m.validate();
  return m;
}

}  // namespace nspinn
