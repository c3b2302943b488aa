#include "nspinn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fftw3.h>

#include "json.hpp"

namespace nspinn {

double rms(const std::vector<double>& s) {
  if (s.empty()) throw std::invalid_argument("rms: empty series");
  double acc = 0.0;
  for (double v : s) acc += v * v;
  return std::sqrt(acc / static_cast<double>(s.size()));
}

double relative_error(double value, double reference) {
  if (reference == 0.0) throw std::invalid_argument("relative_error: zero reference");
  return 100.0 * std::abs(value - reference) / std::abs(reference);
}

namespace {
// FFTW planning is not thread-safe.
std::mutex fftw_mutex;
}  // namespace

std::vector<SpectrumPoint> spectrum(const std::vector<double>& s, double dt) {
  const int n = static_cast<int>(s.size());
  if (n < 2) throw std::invalid_argument("spectrum: need at least two samples");
  if (!(dt > 0.0)) throw std::invalid_argument("spectrum: dt must be positive");
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= n;
  std::vector<double> in(n);
  for (int i = 0; i < n; ++i) in[i] = s[i] - mean;
  const int m = n / 2 + 1;
  std::vector<std::complex<double>> out(m);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  std::vector<SpectrumPoint> spec(m);
  for (int k = 0; k < m; ++k) {
    double a = std::abs(out[k]) / n;
    if (k > 0 && !(n % 2 == 0 && k == n / 2)) a *= 2.0;
    spec[k] = {k / (n * dt), a};
  }
  return spec;
}

std::vector<SpectrumPoint> spectrum_peaks(const std::vector<SpectrumPoint>& spec, double rel_threshold) {
  double top = 0.0;
  for (const auto& p : spec) top = std::max(top, p.amplitude);
  std::vector<SpectrumPoint> peaks;
  if (!(top > 0.0)) return peaks;
  for (std::size_t k = 1; k + 1 < spec.size(); ++k) {
    const double a = spec[k].amplitude;
    if (a >= spec[k - 1].amplitude && a > spec[k + 1].amplitude && a >= rel_threshold * top) peaks.push_back(spec[k]);
  }
  return peaks;
}

std::vector<Regime> regime_sequence(const Trajectory& tr, int contact, double min_duration) {
  struct Run {
    Regime r;
    double len;
  };
  std::vector<Run> runs;
  for (const auto& s : tr.states) {
    const Regime r = s.regime.at(contact);
    if (!runs.empty() && runs.back().r == r) runs.back().len += tr.dt;
    else runs.push_back({r, tr.dt});
  }
  // Short runs join the previous long run; leading ones wait for the first.
  std::vector<Run> kept;
  double pending = 0.0;
  for (const Run& run : runs) {
    if (run.len < min_duration - 1e-12) {
      if (kept.empty()) pending += run.len;
      else kept.back().len += run.len;
      continue;
    }
    if (!kept.empty() && kept.back().r == run.r) {
      kept.back().len += run.len;
    } else {
      kept.push_back({run.r, run.len + pending});
      pending = 0.0;
    }
  }
  std::vector<Regime> seq;
  for (const Run& r : kept) seq.push_back(r.r);
  return seq;
}

bool validity_check(const Trajectory& traj, const Trajectory& oracle) {
  if (traj.states.empty() || oracle.states.empty()) return false;
  const std::size_t c = traj.states.front().regime.size();
  if (oracle.states.front().regime.size() != c) return false;
  const double min_duration = kChatterSteps * traj.dt;
  for (std::size_t i = 0; i < c; ++i)
    if (regime_sequence(traj, static_cast<int>(i), min_duration) !=
        regime_sequence(oracle, static_cast<int>(i), min_duration))
      return false;
  return true;
}

std::vector<double> series(const Trajectory& tr, const std::string& q) {
  auto index_of = [&](std::size_t prefix) {
    const int i = std::stoi(q.substr(prefix)) - 1;
    if (i < 0) throw std::invalid_argument("series: indices are 1-based: " + q);
    return i;
  };
  std::vector<double> out;
  out.reserve(tr.states.size());
  if (q.rfind("lambda_N", 0) == 0) {
    const int i = index_of(8);
    for (const auto& s : tr.states) out.push_back(s.lambda_N(i));
  } else if (q.rfind("lambda_T", 0) == 0) {
    const int i = index_of(8);
    for (const auto& s : tr.states) out.push_back(s.lambda_T(i));
  } else if (q.rfind("q", 0) == 0) {
    const int i = index_of(1);
    for (const auto& s : tr.states) out.push_back(s.q(i));
  } else if (q.rfind("u", 0) == 0) {
    const int i = index_of(1);
    for (const auto& s : tr.states) out.push_back(s.u(i));
  } else {
    throw std::invalid_argument("series: unknown quantity " + q);
  }
  return out;
}

std::vector<std::string> default_quantities(const MechModel& m) {
  std::vector<std::string> q;
  if (!m.prescribed_normal)
    for (int i = 1; i <= m.n_contacts(); ++i) q.push_back("lambda_N" + std::to_string(i));
  for (int i = 1; i <= m.n_dof(); ++i) q.push_back("q" + std::to_string(i));
  for (int i = 1; i <= m.n_dof(); ++i) q.push_back("u" + std::to_string(i));
  return q;
}

std::string run_label(const MethodSpec& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "_dt%g", s.dt);
  return method_tag(s.method, s.order) + buf;
}

MechModel build_model(const ModelSpec& s) {
  if (s.kind == "model1") return model_one(s.p1);
  if (s.kind == "model2") return model_two(s.p2);
  if (s.kind == "custom" && s.custom) {
    s.custom->validate();
    return *s.custom;
  }
  throw std::invalid_argument("unknown model kind: " + s.kind);
}

SystemState initial_state(const MechModel& m, const ExperimentConfig& cfg) {
  const int n = m.n_dof();
  Vec q = Vec::Zero(n), u = Vec::Zero(n);
  if (cfg.model.kind == "model1") {
    u.setConstant(cfg.model.p1.v0);
  } else if (cfg.model.kind == "model2") {
    q.setConstant(-10.0);
    u.setConstant(cfg.model.p2.v0);
  }
  if (cfg.q0) q = *cfg.q0;
  if (cfg.u0) u = *cfg.u0;
  if (q.size() != n || u.size() != n) throw std::invalid_argument("initial conditions: dimension mismatch");
  return make_state(m, 0.0, q, u);
}

namespace {

ReferenceResult run_oracle(const MechModel& m, const SystemState& s0, double t_end, double dt,
                           const ReferenceOptions& o) {
  if (m.prescribed_normal && m.n_dof() == 1) return switching_simulate_1dof(m, s0, t_end, dt, o);
  if (m.contact_type == ContactType::spring && m.n_dof() == 2) return root_shooting_simulate_2dof(m, s0, t_end, dt, o);
  return hybrid_simulate(m, s0, t_end, dt, o);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

ComparisonReport run_experiment(const ExperimentConfig& cfg) {
  if (!(cfg.t_end > 0.0)) throw std::invalid_argument("experiment: t_end must be positive");
  for (const auto& ms : cfg.methods)
    if (!(ms.dt > 0.0)) throw std::invalid_argument("experiment: every dt must be positive");
  const MechModel m = build_model(cfg.model);
  const SystemState s0 = initial_state(m, cfg);
  const std::vector<std::string> quantities = cfg.quantities.empty() ? default_quantities(m) : cfg.quantities;

  ComparisonReport rep;
  rep.name = cfg.name;

  // One oracle per distinct dt so that every RMS compares equal sample grids.
  std::map<double, ReferenceResult> oracles;
  if (cfg.oracle) {
    for (const auto& ms : cfg.methods) oracles.try_emplace(ms.dt);
    if (oracles.empty()) oracles.try_emplace(1e-3);
    for (auto& [dt, res] : oracles) res = run_oracle(m, s0, cfg.t_end, dt, cfg.oracle_opt);
    const ReferenceResult& finest = oracles.begin()->second;
    rep.events = finest.events;
    for (const auto& q : quantities) rep.oracle.push_back({q, rms(series(finest.trajectory, q)), 0.0});
  }

  rep.methods.resize(cfg.methods.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < cfg.methods.size(); i = next++) {
      const MethodSpec& ms = cfg.methods[i];
      MethodResult& mr = rep.methods[i];
      mr.spec = ms;
      mr.label = run_label(ms);
      try {
        SimulateOptions so;
        so.order = ms.order;
        PinnStepConfig pc = cfg.pinn ? *cfg.pinn : PinnStepConfig{};
        if (is_pinn(ms.method)) {
          pc.tableau = irk_coefficients(ms.order);
          pc.seed = ms.seed;
          pc.lcp_pinn.seed = ms.seed;
          so.pinn = &pc;
        }
        mr.trajectory = simulate(m, s0, cfg.t_end, ms.dt, ms.method, so);
        mr.ok = true;
        for (const auto& d : mr.trajectory.diagnostics) {
          mr.max_complementarity = std::max(mr.max_complementarity, d.lcp_complementarity);
          mr.max_dynamics_residual = std::max(mr.max_dynamics_residual, d.dynamics_residual);
        }
        if (cfg.oracle) {
          const Trajectory& o = oracles.at(ms.dt).trajectory;
          mr.valid = validity_check(mr.trajectory, o);
          for (const auto& q : quantities) {
            const double v = rms(series(mr.trajectory, q)), ref = rms(series(o, q));
            mr.quantities.push_back({q, v, ref != 0.0 ? relative_error(v, ref) : std::abs(v)});
          }
        } else {
          mr.valid = true;
          for (const auto& q : quantities) mr.quantities.push_back({q, rms(series(mr.trajectory, q)), 0.0});
        }
      } catch (const std::exception& e) {
        mr.ok = false;
        mr.error = e.what();
      }
    }
  };
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max<int>(1, static_cast<int>(cfg.methods.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (!cfg.output_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);
    for (const auto& [dt, res] : oracles)
      write_trajectory_csv(res.trajectory, (dir / ("trajectory_oracle" + fmt("_dt%g", dt) + ".csv")).string());
    if (cfg.oracle) {
      write_events_csv(rep.events, (dir / "events.csv").string());
      const auto& o = oracles.begin()->second.trajectory;
      write_spectrum_csv(spectrum(series(o, "q1"), o.dt), (dir / "spectrum_oracle.csv").string());
    }
    for (const auto& mr : rep.methods) {
      if (!mr.ok) continue;
      write_trajectory_csv(mr.trajectory, (dir / ("trajectory_" + mr.label + ".csv")).string());
      write_spectrum_csv(spectrum(series(mr.trajectory, "q1"), mr.trajectory.dt),
                         (dir / ("spectrum_" + mr.label + ".csv")).string());
    }
    std::ofstream(dir / "report.txt") << report_text(rep);
    std::ofstream(dir / "report.json") << report_json(rep);
  }
  return rep;
}

std::string report_text(const ComparisonReport& r) {
  std::ostringstream os;
  os << "experiment: " << r.name << "\n";
  os << "oracle events: " << r.events.size() << "\n\n";
  std::vector<std::string> names;
  if (!r.oracle.empty())
    for (const auto& q : r.oracle) names.push_back(q.name);
  else if (!r.methods.empty())
    for (const auto& q : r.methods.front().quantities) names.push_back(q.name);

  char buf[256];
  std::snprintf(buf, sizeof buf, "%-32s %-6s", "method", "valid");
  os << buf;
  for (const auto& n : names) {
    std::snprintf(buf, sizeof buf, " %26s", (n + " rms (err%)").c_str());
    os << buf;
  }
  os << "\n";
  if (!r.oracle.empty()) {
    std::snprintf(buf, sizeof buf, "%-32s %-6s", "oracle", "yes");
    os << buf;
    for (const auto& q : r.oracle) {
      std::snprintf(buf, sizeof buf, " %16.6g (%6.3f%%)", q.rms, 0.0);
      os << buf;
    }
    os << "\n";
  }
  for (const auto& m : r.methods) {
    std::snprintf(buf, sizeof buf, "%-32s %-6s", m.label.c_str(), !m.ok ? "error" : m.valid ? "yes" : "x");
    os << buf;
    if (!m.ok) {
      os << " " << m.error << "\n";
      continue;
    }
    for (const auto& q : m.quantities) {
      if (m.valid) std::snprintf(buf, sizeof buf, " %16.6g (%6.3f%%)", q.rms, q.rel_error);
      else std::snprintf(buf, sizeof buf, " %16.6g (%7s)", q.rms, "x");
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

std::string report_json(const ComparisonReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["oracle"] = nlohmann::ordered_json::object();
  for (const auto& q : r.oracle) j["oracle"][q.name] = q.rms;
  j["events"] = nlohmann::ordered_json::array();
  for (const auto& e : r.events)
    j["events"].push_back({{"t_event", e.t_event}, {"kind", std::string(to_string(e.kind))}});
  j["methods"] = nlohmann::ordered_json::array();
  for (const auto& m : r.methods) {
    nlohmann::ordered_json mj;
    mj["label"] = m.label;
    mj["method"] = method_name(m.spec.method);
    mj["dt"] = m.spec.dt;
    mj["order"] = m.spec.order;
    mj["ok"] = m.ok;
    if (!m.ok) mj["error"] = m.error;
    mj["valid"] = m.valid;
    mj["max_complementarity"] = m.max_complementarity;
    mj["max_dynamics_residual"] = m.max_dynamics_residual;
    mj["quantities"] = nlohmann::ordered_json::object();
    for (const auto& q : m.quantities) {
      nlohmann::ordered_json qj;
      qj["rms"] = q.rms;
      qj["rel_error"] = m.valid ? nlohmann::ordered_json(q.rel_error) : nlohmann::ordered_json(nullptr);
      qj["raw_rel_error"] = q.rel_error;
      mj["quantities"][q.name] = qj;
    }
    j["methods"].push_back(mj);
  }
  return j.dump(2) + "\n";
}

void write_trajectory_csv(const Trajectory& tr, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  if (tr.states.empty()) return;
  const auto& f = tr.states.front();
  const int n = static_cast<int>(f.q.size()), c = static_cast<int>(f.regime.size());
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",q_" << i;
  for (int i = 1; i <= n; ++i) os << ",u_" << i;
  for (int i = 1; i <= c; ++i) os << ",lambda_N_" << i;
  for (int i = 1; i <= c; ++i) os << ",lambda_T_" << i;
  for (int i = 1; i <= c; ++i) os << ",regime_" << i;
  os << "\n";
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  for (const auto& s : tr.states) {
    os << num(s.t);
    for (int i = 0; i < n; ++i) os << ',' << num(s.q(i));
    for (int i = 0; i < n; ++i) os << ',' << num(s.u(i));
    for (int i = 0; i < c; ++i) os << ',' << num(s.lambda_N(i));
    for (int i = 0; i < c; ++i) os << ',' << num(s.lambda_T(i));
    for (int i = 0; i < c; ++i) os << ',' << static_cast<int>(s.regime[i]);
    os << "\n";
  }
}

void write_events_csv(const std::vector<EventRecord>& ev, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "t_event,kind,bracket_width\n";
  char buf[80];
  for (const auto& e : ev) {
    std::snprintf(buf, sizeof buf, "%.17g,", e.t_event);
    os << buf << to_string(e.kind);
    std::snprintf(buf, sizeof buf, ",%.3g\n", e.bracket_width);
    os << buf;
  }
}

void write_spectrum_csv(const std::vector<SpectrumPoint>& spec, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "frequency,amplitude\n";
  char buf[80];
  for (const auto& p : spec) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", p.frequency, p.amplitude);
    os << buf;
  }
}

}  // namespace nspinn
