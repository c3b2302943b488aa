#include "nspinn/reference.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

namespace nspinn {

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::stick_to_slip: return "stick_to_slip";
    case EventKind::slip_to_stick: return "slip_to_stick";
    case EventKind::separation: return "separation";
    case EventKind::reattachment: return "reattachment";
  }
  return "unknown";
}

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

enum class Phase { stick, slip, separated };

struct Mode {
  Phase phase = Phase::slip;
  int dir = 1;  // slip direction, sign of gamma_T
};

enum class Trigger { none, velocity_zero, stick_break, separation, contact };

class Hybrid {
 public:
  explicit Hybrid(const MechModel& m) : m_(m), n_(m.n_dof()) {
    m.validate();
    if (m.n_contacts() != 1) throw std::invalid_argument("reference solver: exactly one contact required");
    if (!m.prescribed_normal && m.contact_type != ContactType::spring)
      throw std::invalid_argument("reference solver: needs a prescribed normal force or spring contact");
    Minv_ = m.M.ldlt().solve(Mat::Identity(n_, n_));
    wN_ = m.W_N.col(0);
    wT_ = m.W_T.col(0);
    G_ = wT_.dot(Minv_ * wT_);
    if (!(G_ > 0.0)) throw std::invalid_argument("reference solver: W_T has no inertia");
    mu_s_ = friction_coefficient(m.friction[0], 0.0);
  }

  int n() const { return n_; }
  bool spring() const { return !m_.prescribed_normal; }

  Eigen::Map<const Vec> q(const State& z) const { return {z.data(), n_}; }
  Eigen::Map<const Vec> u(const State& z) const { return {z.data() + n_, n_}; }

  double gap(const State& z) const { return wN_.dot(q(z)) + m_.g0(0); }
  double gamma(const State& z) const { return wT_.dot(u(z)) + m_.w_T(0); }
  double lambda_N(const State& z) const {
    if (m_.prescribed_normal) return (*m_.prescribed_normal)(0);
    return m_.k_c(0) * std::max(0.0, -gap(z));
  }
  // Tangential force holding gamma_T constant.
  double lambda_required(const State& z) const {
    const Vec h = h_vector(m_, q(z), u(z)) + wN_ * lambda_N(z);
    return -wT_.dot(Minv_ * h) / G_;
  }
  double lambda_T(const State& z, const Mode& md) const {
    switch (md.phase) {
      case Phase::stick: return lambda_required(z);
      case Phase::slip: return -md.dir * friction_coefficient(m_.friction[0], gamma(z)) * lambda_N(z);
      case Phase::separated: return 0.0;
    }
    return 0.0;
  }

  void rhs(const State& z, State& dz, const Mode& md) const {
    const double lN = md.phase == Phase::separated ? 0.0 : lambda_N(z);
    const Vec a = Minv_ * (h_vector(m_, q(z), u(z)) + wN_ * lN + wT_ * lambda_T(z, md));
    for (int i = 0; i < n_; ++i) {
      dz[i] = z[n_ + i];
      dz[n_ + i] = a(i);
    }
  }

  Trigger trigger(const State& z, const Mode& md) const {
    switch (md.phase) {
      case Phase::slip:
        if (spring() && gap(z) > 0.0) return Trigger::separation;
        if (md.dir * gamma(z) < -gamma_tiny()) return Trigger::velocity_zero;
        return Trigger::none;
      case Phase::stick:
        if (spring() && gap(z) > 0.0) return Trigger::separation;
        if (std::abs(lambda_required(z)) - mu_s_ * lambda_N(z) > 0.0) return Trigger::stick_break;
        return Trigger::none;
      case Phase::separated: return gap(z) < 0.0 ? Trigger::contact : Trigger::none;
    }
    return Trigger::none;
  }

  // Direction a slip takes from gamma_T = 0 when stick cannot hold.
  int breakaway_dir(const State& z) const { return lambda_required(z) > 0.0 ? -1 : 1; }

  bool stick_holds(const State& z) const { return std::abs(lambda_required(z)) <= mu_s_ * lambda_N(z); }

  void project_stick(State& z) const {
    const Vec du = Minv_ * wT_ * (gamma(z) / G_);
    for (int i = 0; i < n_; ++i) z[n_ + i] -= du(i);
  }

  // Mode for a state at gamma_T = 0 or any state after a contact event.
  Mode classify(State& z) const {
    if (spring() && gap(z) > 0.0) return {Phase::separated, 0};
    const double g = gamma(z);
    if (std::abs(g) > gamma_tiny()) return {Phase::slip, g > 0.0 ? 1 : -1};
    if (stick_holds(z)) {
      project_stick(z);
      return {Phase::stick, 0};
    }
    return {Phase::slip, breakaway_dir(z)};
  }

  SystemState sample(double t, const State& z, const Mode& md) const {
    SystemState s;
    s.t = t;
    s.q = q(z);
    s.u = u(z);
    s.lambda_N = Vec::Constant(1, md.phase == Phase::separated ? 0.0 : lambda_N(z));
    s.lambda_T = Vec::Constant(1, lambda_T(z, md));
    s.g_N = nspinn::gap(m_, s.q);
    s.gamma_T = tangential_velocity(m_, s.u);
    const Regime r = md.phase == Phase::stick ? Regime::stick
                     : md.phase == Phase::slip ? Regime::slip
                                               : Regime::separated;
    s.regime = {r};
    return s;
  }

 private:
  double gamma_tiny() const { return 1e-13 * std::max(1.0, std::abs(m_.w_T(0))); }

  const MechModel& m_;
  int n_;
  Mat Minv_;
  Vec wN_, wT_;
  double G_ = 1.0;
  double mu_s_ = 0.0;
};

}  // namespace

ReferenceResult hybrid_simulate(const MechModel& m, const SystemState& initial, double t_end, double dt_out,
                                const ReferenceOptions& opt) {
  if (!(opt.event_tol > 0.0) || !(opt.rtol > 0.0) || !(opt.atol > 0.0))
    throw std::invalid_argument("reference solver: tolerances must be positive");
  const Hybrid hy(m);
  const int n = hy.n();
  const long n_out = step_count(initial.t, t_end, dt_out);

  ReferenceResult res;
  Trajectory& tr = res.trajectory;
  tr.dt = dt_out;
  tr.method_tag = hy.spring() ? "root_shooting" : "switching";

  State z(2 * n);
  for (int i = 0; i < n; ++i) {
    z[i] = initial.q(i);
    z[n + i] = initial.u(i);
  }
  double t = initial.t;
  Mode md = hy.classify(z);
  tr.times.push_back(t);
  tr.states.push_back(hy.sample(t, z, md));

  using Stepper = odeint::runge_kutta_dopri5<State>;
  auto controlled = odeint::make_controlled(opt.atol, opt.rtol, Stepper());
  Stepper plain;

  State dz(2 * n), z_new(2 * n), dz_new(2 * n), z_try(2 * n), dz_try(2 * n);
  // Right-hand side of the current mode; md changes only at events.
  auto sys = [&hy, &md](const State& x, State& dx, double) { hy.rhs(x, dx, md); };
  sys(z, dz, t);

  double h = std::min(dt_out, 1e-3);
  long k = 1;
  long guard = 0;
  const long max_events = 10'000'000;
  while (k <= n_out) {
    const double target = initial.t + k * dt_out;
    const double span = target - t;
    if (span <= 1e-12 * std::max(1.0, std::abs(target))) {
      tr.times.push_back(target);
      SystemState s = hy.sample(target, z, md);
      tr.states.push_back(std::move(s));
      ++k;
      continue;
    }
    const bool clipped = h >= span;
    double step = clipped ? span : h;
    z_new = z;
    dz_new = dz;
    double t_new = t;
    odeint::controlled_step_result r;
    int rejects = 0;
    do {
      r = controlled.try_step(sys, z_new, dz_new, t_new, step);
      if (++rejects > 200) throw std::runtime_error("reference solver: step size underflow");
    } while (r == odeint::fail);
    const double taken = t_new - t;
    if (!clipped || taken < span) h = step;  // controller suggestion

    const Trigger trg = hy.trigger(z_new, md);
    if (trg == Trigger::none) {
      z.swap(z_new);
      dz.swap(dz_new);
      t = t_new;
      if (std::abs(t - target) <= 1e-12 * std::max(1.0, std::abs(target))) t = target;
      continue;
    }

    // Bisection on the step length from the accepted step start.
    double lo = 0.0, hi = taken;
    State z_hi = z_new;
    while (hi - lo > opt.event_tol) {
      const double mid = 0.5 * (lo + hi);
      plain.do_step(sys, z, dz, t, z_try, dz_try, mid);
      if (hy.trigger(z_try, md) != Trigger::none) {
        hi = mid;
        z_hi = z_try;
      } else {
        lo = mid;
      }
    }
    const Trigger at = hy.trigger(z_hi, md);
    t += hi;
    z = z_hi;
    EventRecord ev{t, EventKind::stick_to_slip, hi - lo};
    bool record = true;
    switch (at) {
      case Trigger::velocity_zero:
        if (hy.stick_holds(z)) {
          hy.project_stick(z);
          md = {Phase::stick, 0};
          ev.kind = EventKind::slip_to_stick;
        } else {
          md = {Phase::slip, -md.dir};
          record = false;
        }
        break;
      case Trigger::stick_break:
        md = {Phase::slip, hy.breakaway_dir(z)};
        ev.kind = EventKind::stick_to_slip;
        break;
      case Trigger::separation:
        md = {Phase::separated, 0};
        ev.kind = EventKind::separation;
        break;
      case Trigger::contact:
        md = hy.classify(z);
        if (md.phase == Phase::separated) md = {Phase::slip, hy.gamma(z) >= 0.0 ? 1 : -1};
        ev.kind = EventKind::reattachment;
        break;
      case Trigger::none: record = false; break;
    }
    if (record) res.events.push_back(ev);
    if (++guard > max_events) throw std::runtime_error("reference solver: event limit exceeded (Zeno behaviour)");
    sys(z, dz, t);
  }
  return res;
}

ReferenceResult switching_simulate_1dof(const MechModel& m, const SystemState& initial, double t_end, double dt_out,
                                        const ReferenceOptions& opt) {
  if (m.n_dof() != 1 || !m.prescribed_normal)
    throw std::invalid_argument("switching_simulate_1dof: needs a 1-DoF model with prescribed normal force");
  return hybrid_simulate(m, initial, t_end, dt_out, opt);
}

ReferenceResult root_shooting_simulate_2dof(const MechModel& m, const SystemState& initial, double t_end,
                                            double dt_out, const ReferenceOptions& opt) {
  if (m.n_dof() != 2 || m.contact_type != ContactType::spring || m.prescribed_normal)
    throw std::invalid_argument("root_shooting_simulate_2dof: needs the 2-DoF spring-contact model");
  return hybrid_simulate(m, initial, t_end, dt_out, opt);
}

}  // namespace nspinn
