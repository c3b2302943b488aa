#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nspinn/contact.hpp"
#include "nspinn/pinn_dynamics.hpp"
#include "nspinn/reference.hpp"
#include "nspinn/time_stepping.hpp"

namespace nspinn {

double rms(const std::vector<double>& series);
// Percent; throws on a zero reference.
double relative_error(double value, double reference);

struct SpectrumPoint {
  double frequency = 0.0;
  double amplitude = 0.0;
};

// Single-sided amplitude spectrum of the mean-removed series.
std::vector<SpectrumPoint> spectrum(const std::vector<double>& series, double dt);
// Local maxima above rel_threshold times the largest amplitude.
std::vector<SpectrumPoint> spectrum_peaks(const std::vector<SpectrumPoint>& spec, double rel_threshold = 0.05);

// Regime kinds of one contact after merging runs shorter than min_duration
// into their neighbours.
std::vector<Regime> regime_sequence(const Trajectory& tr, int contact, double min_duration);

constexpr int kChatterSteps = 5;

// Per-contact regime sequences agree after the chatter filter, which uses
// kChatterSteps steps of traj.dt on both trajectories.
bool validity_check(const Trajectory& traj, const Trajectory& oracle);

// Series extraction by quantity name: q<i>, u<i>, lambda_N<i>, lambda_T<i> (1-based).
std::vector<double> series(const Trajectory& tr, const std::string& quantity);
std::vector<std::string> default_quantities(const MechModel& m);

struct MethodSpec {
  Method method = Method::conventional;
  double dt = 1e-3;
  int order = 4;
  std::uint64_t seed = 1;
};

std::string run_label(const MethodSpec& s);

struct ModelSpec {
  std::string kind = "model1";  // model1 | model2 | custom
  Model1Params p1;
  Model2Params p2;
  std::optional<MechModel> custom;
};

MechModel build_model(const ModelSpec& s);

struct ExperimentConfig {
  std::string name = "experiment";
  ModelSpec model;
  std::optional<Vec> q0, u0;  // defaults per model
  double t_end = 10.0;
  bool oracle = true;
  ReferenceOptions oracle_opt;
  std::vector<MethodSpec> methods;
  std::vector<std::string> quantities;  // empty: default_quantities
  std::string output_dir;               // empty: no files
  int threads = 0;                      // 0: hardware concurrency
  std::optional<PinnStepConfig> pinn;   // overrides (tableau set per run)
};

SystemState initial_state(const MechModel& m, const ExperimentConfig& cfg);

ExperimentConfig load_experiment(const std::string& path);
ExperimentConfig parse_experiment(const std::string& json_text);
ModelSpec parse_model_spec(const std::string& json_text);

struct QuantityResult {
  std::string name;
  double rms = 0.0;
  double rel_error = 0.0;  // percent vs oracle
};

struct MethodResult {
  std::string label;
  MethodSpec spec;
  bool ok = false;
  std::string error;
  bool valid = false;
  std::vector<QuantityResult> quantities;
  double max_complementarity = 0.0;
  double max_dynamics_residual = 0.0;
  Trajectory trajectory;
};

struct ComparisonReport {
  std::string name;
  std::vector<QuantityResult> oracle;
  std::vector<EventRecord> events;
  std::vector<MethodResult> methods;
};

// Runs the oracle (one per distinct dt) and every method concurrently; a
// failing method is reported and the others continue.
ComparisonReport run_experiment(const ExperimentConfig& cfg);

std::string report_text(const ComparisonReport& r);
std::string report_json(const ComparisonReport& r);

void write_trajectory_csv(const Trajectory& tr, const std::string& path);
void write_events_csv(const std::vector<EventRecord>& ev, const std::string& path);
void write_spectrum_csv(const std::vector<SpectrumPoint>& spec, const std::string& path);

}  // namespace nspinn
