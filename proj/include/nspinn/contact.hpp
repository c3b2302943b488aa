#pragma once

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nspinn/lcp.hpp"

namespace nspinn {

enum class ContactType { rigid, spring };

enum class FrictionKind { constant, stribeck_rational, stribeck_exponential };

struct FrictionLaw {
  FrictionKind kind = FrictionKind::constant;
  double mu_s = 0.0;
  double mu_d = 0.0;
  double delta = 0.0;  // s/m, rational law
  double alpha = 0.0;  // s/m, exponential law
  // Evaluate the exponential law as mu_s + (mu_s - mu_d) e^{-alpha|v|}.
  bool printed_exponential = false;

  static FrictionLaw constant(double mu);
  static FrictionLaw rational(double mu_s, double delta);
  static FrictionLaw exponential(double mu_s, double mu_d, double alpha);
  bool velocity_dependent() const;
  bool valid() const;
};

double friction_coefficient(const FrictionLaw& law, double v_rel);

enum class Regime : int { stick = 0, slip = 1, separated = 2 };

std::string_view to_string(Regime r);

// M qdd = h + W_N lambda_N + W_T lambda_T with h = -Cs u - Ks q + f_e.
// Gaps g_N = W_N^T q + g0, tangential velocities gamma_T = W_T^T u + w_T.
struct MechModel {
  std::string name;
  Mat M, Ks, Cs;
  Vec f_e;
  ContactType contact_type = ContactType::rigid;
  Vec k_c;  // diagonal contact stiffness (spring contact)
  Mat W_N, W_T;
  Vec w_N, w_T;
  Vec g0;
  std::vector<FrictionLaw> friction;
  // Normal force held fixed instead of solved for (1-DoF belt model).
  std::optional<Vec> prescribed_normal;

  int n_dof() const { return static_cast<int>(M.rows()); }
  int n_contacts() const { return static_cast<int>(W_T.cols()); }
  void validate() const;  // throws std::invalid_argument
};

struct SystemState {
  double t = 0.0;
  Vec q, u;
  Vec lambda_N, lambda_T;
  Vec g_N, gamma_T;
  std::vector<Regime> regime;
};

constexpr double kStickVelocityEps = 1e-6;
constexpr double kSeparationForceEps = 1e-8;

Vec gap(const MechModel& m, const Vec& q);
Vec tangential_velocity(const MechModel& m, const Vec& u);
Vec h_vector(const MechModel& m, const Vec& q, const Vec& u);

// State with kinematic contact quantities filled in; forces are zero except a
// prescribed normal force, and regimes are flagged from them.
SystemState make_state(const MechModel& m, double t, const Vec& q, const Vec& u);

// Regime flags from (gamma_T, lambda_N); diagnostic only.
std::vector<Regime> classify_regimes(const MechModel& m, const Vec& gamma_T, const Vec& lambda_N,
                                     double v_eps = kStickVelocityEps);

// End-of-step contact kinematics as an affine function of the step impulses
// Lambda = lambda * dt:
//   g_E     = g_free     + dt (G_NN Lambda_N + G_NT Lambda_T)
//   gamma_E = gamma_free +     G_TN Lambda_N + G_TT Lambda_T
struct ContactResponse {
  Vec g_free, gamma_free;
  Mat G_NN, G_NT, G_TN, G_TT;
};

// Response of the semi-implicit update u_E = u + M^{-1}(h dt + W Lambda),
// q_E = q + u_E dt.
ContactResponse euler_response(const MechModel& m, const SystemState& s, double dt);

enum class LcpLayout { rigid, spring, tangential };

std::string_view to_string(LcpLayout l);

// Unknowns x = [Lambda_N, Lambda_L, gamma_R], complements
// y = [normal row, gamma_L, Lambda_R]; the tangential layout drops the normal
// block because Lambda_N is prescribed.
struct AssembledLcp {
  LcpProblem problem;
  LcpLayout layout = LcpLayout::rigid;
  int n_contacts = 0;
  Vec mu;
  Vec Lambda_N_prescribed;
  double dt = 0.0;
};

AssembledLcp assemble_lcp(const MechModel& m, const ContactResponse& r, const Vec& mu, double dt);
// Friction coefficients evaluated at the start-of-step relative velocity.
AssembledLcp assemble_rigid_lcp(const MechModel& m, const SystemState& s, double dt);
AssembledLcp assemble_spring_lcp(const MechModel& m, const SystemState& s, double dt);
AssembledLcp assemble_step_lcp(const MechModel& m, const SystemState& s, double dt);

Vec friction_coefficients(const MechModel& m, const Vec& gamma_T);

struct ContactImpulses {
  Vec Lambda_N, Lambda_T, Lambda_L, Lambda_R;
  Vec gamma_R, gamma_L, gamma_T;  // gamma_T = gamma_R - gamma_L at t_E
};

ContactImpulses decode(const AssembledLcp& lcp, const Vec& x, const Vec& y);

// Eigenvalues of the sliding-contact linearization, sorted by imaginary part.
std::vector<std::complex<double>> eigen_stability(const MechModel& m, double mu);
// K_eff = Ks + W_N k_c W_N^T + mu W_T k_c W_N^T (belt faster than the body).
Mat effective_stiffness(const MechModel& m, double mu);

struct EigenSweepPoint {
  double mu = 0.0;
  std::vector<std::complex<double>> eig;
  double max_real = 0.0;
};

struct EigenSweep {
  std::vector<EigenSweepPoint> points;
  std::optional<double> mu_critical;  // refined by bisection
};

EigenSweep eigen_sweep(const MechModel& m, double mu_min, double mu_max, int steps);

struct Model1Params {
  double m = 1.0, k = 1.0, c = 0.0;
  double F_n = 1.0;
  double v0 = 0.1;
  FrictionLaw law = FrictionLaw::rational(0.1, 1.0);
};

struct Model2Params {
  double m = 5.0, k1 = 1000.0, k3 = 600.0, kc = 500.0, c1 = 0.0, c2 = 0.0;
  double F_p = 100.0;
  double v0 = 1.0;
  FrictionLaw law = FrictionLaw::constant(0.4);
};

MechModel model_one(const Model1Params& p = {});
MechModel model_two(const Model2Params& p = {});

}  // namespace nspinn
