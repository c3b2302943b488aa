#pragma once

#include <string_view>
#include <vector>

#include "nspinn/contact.hpp"
#include "nspinn/time_stepping.hpp"

namespace nspinn {

enum class EventKind { stick_to_slip, slip_to_stick, separation, reattachment };

std::string_view to_string(EventKind k);

struct EventRecord {
  double t_event = 0.0;
  EventKind kind = EventKind::stick_to_slip;
  double bracket_width = 0.0;
};

struct ReferenceOptions {
  double event_tol = 1e-10;  // s
  double rtol = 1e-10;
  double atol = 1e-12;
};

struct ReferenceResult {
  Trajectory trajectory;  // sampled every dt_out
  std::vector<EventRecord> events;
};

// Event-driven integration of a single-contact model: each regime (stick,
// slip in either direction, separated) is a smooth ODE integrated by an
// adaptive Dormand-Prince pair; regime changes are located by bisection.
// Supports a prescribed normal force or a spring contact.
ReferenceResult hybrid_simulate(const MechModel& m, const SystemState& initial, double t_end, double dt_out,
                                const ReferenceOptions& opt = {});

// 1-DoF oscillator on a belt under a prescribed normal force.
ReferenceResult switching_simulate_1dof(const MechModel& m, const SystemState& initial, double t_end, double dt_out,
                                        const ReferenceOptions& opt = {});

// 2-DoF spring-contact model with separation and reattachment.
ReferenceResult root_shooting_simulate_2dof(const MechModel& m, const SystemState& initial, double t_end,
                                            double dt_out, const ReferenceOptions& opt = {});

}  // namespace nspinn
