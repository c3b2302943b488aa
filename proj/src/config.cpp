#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "nspinn/harness.hpp"

namespace nspinn {

namespace {

using nlohmann::json;

Vec vec_of(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Mat mat_of(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  const int r = static_cast<int>(rows.size());
  const int c = r ? static_cast<int>(rows.front().size()) : 0;
  Mat m(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[i].size()) != c) throw std::invalid_argument("config: ragged matrix");
    for (int k = 0; k < c; ++k) m(i, k) = rows[i][k];
  }
  return m;
}

FrictionLaw law_of(const json& j) {
  const std::string kind = j.value("kind", "constant");
  FrictionLaw l;
  if (kind == "constant") {
    l = FrictionLaw::constant(j.value("mu", j.value("mu_s", 0.0)));
  } else if (kind == "rational" || kind == "stribeck_rational") {
    l = FrictionLaw::rational(j.at("mu_s").get<double>(), j.value("delta", 0.0));
  } else if (kind == "exponential" || kind == "stribeck_exponential") {
    const double mu_s = j.at("mu_s").get<double>();
    l = FrictionLaw::exponential(mu_s, j.value("mu_d", 0.5 * mu_s), j.value("alpha", 10.0));
    l.printed_exponential = j.value("printed", false);
  } else {
    throw std::invalid_argument("config: unknown friction kind " + kind);
  }
  if (!l.valid()) throw std::invalid_argument("config: invalid friction parameters");
  return l;
}

ModelSpec model_of(const json& j) {
  ModelSpec s;
  s.kind = j.value("kind", "model1");
  if (s.kind == "model1") {
    auto& p = s.p1;
    p.m = j.value("m", p.m);
    p.k = j.value("k", p.k);
    p.c = j.value("c", p.c);
    p.F_n = j.value("F_n", p.F_n);
    p.v0 = j.value("v0", p.v0);
    if (j.contains("friction")) p.law = law_of(j["friction"]);
  } else if (s.kind == "model2") {
    auto& p = s.p2;
    p.m = j.value("m", p.m);
    p.k1 = j.value("k1", p.k1);
    p.k3 = j.value("k3", p.k3);
    p.kc = j.value("kc", p.kc);
    p.c1 = j.value("c1", p.c1);
    p.c2 = j.value("c2", p.c2);
    p.F_p = j.value("F_p", p.F_p);
    p.v0 = j.value("v0", p.v0);
    if (j.contains("friction")) p.law = law_of(j["friction"]);
  } else if (s.kind == "custom") {
    MechModel m;
    m.name = j.value("name", "custom");
    m.M = mat_of(j.at("M"));
    const int n = static_cast<int>(m.M.rows());
    m.Ks = j.contains("Ks") ? mat_of(j["Ks"]) : Mat::Zero(n, n);
    m.Cs = j.contains("Cs") ? mat_of(j["Cs"]) : Mat::Zero(n, n);
    m.f_e = j.contains("f_e") ? vec_of(j["f_e"]) : Vec::Zero(n);
    const std::string ct = j.value("contact_type", "rigid");
    if (ct != "rigid" && ct != "spring") throw std::invalid_argument("config: contact_type must be rigid or spring");
    m.contact_type = ct == "spring" ? ContactType::spring : ContactType::rigid;
    m.W_N = mat_of(j.at("W_N"));
    m.W_T = mat_of(j.at("W_T"));
    const int c = static_cast<int>(m.W_T.cols());
    m.w_N = j.contains("w_N") ? vec_of(j["w_N"]) : Vec::Zero(c);
    m.w_T = j.contains("w_T") ? vec_of(j["w_T"]) : Vec::Zero(c);
    m.g0 = j.contains("g0") ? vec_of(j["g0"]) : Vec::Zero(c);
    if (j.contains("k_c")) m.k_c = vec_of(j["k_c"]);
    if (j.contains("prescribed_normal")) m.prescribed_normal = vec_of(j["prescribed_normal"]);
    const json& fr = j.at("friction");
    if (fr.is_array())
      for (const auto& f : fr) m.friction.push_back(law_of(f));
    else
      m.friction.assign(c, law_of(fr));
    m.validate();
    s.custom = std::move(m);
  } else {
    throw std::invalid_argument("config: unknown model kind " + s.kind);
  }
  return s;
}

PinnStepConfig pinn_of(const json& j) {
  PinnStepConfig p;
  if (j.contains("hidden")) p.hidden = j["hidden"].get<std::vector<int>>();
  if (j.contains("activation")) {
    auto a = parse_activation(j["activation"].get<std::string>());
    if (!a) throw std::invalid_argument("config: bad activation");
    p.activation = *a;
  }
  p.tol = j.value("tol", p.tol);
  p.max_iter = j.value("max_iter", p.max_iter);
  p.restarts = j.value("restarts", p.restarts);
  p.warm_start = j.value("warm_start", p.warm_start);
  p.mu_iterations = j.value("mu_iterations", p.mu_iterations);
  if (j.contains("lcp_pinn")) {
    const json& l = j["lcp_pinn"];
    auto& c = p.lcp_pinn;
    if (l.contains("hidden")) c.hidden = l["hidden"].get<std::vector<int>>();
    if (l.contains("activation")) {
      auto a = parse_activation(l["activation"].get<std::string>());
      if (!a) throw std::invalid_argument("config: bad LCP activation");
      c.activation = *a;
    }
    c.tol = l.value("tol", c.tol);
    c.max_iter = l.value("max_iter", c.max_iter);
    c.restarts = l.value("restarts", c.restarts);
    c.output_init_scale = l.value("output_init_scale", c.output_init_scale);
    c.equilibrate = l.value("equilibrate", c.equilibrate);
    c.polish = l.value("polish", c.polish);
  }
  if (p.tol <= 0.0 || p.max_iter < 1 || p.restarts < 0) throw std::invalid_argument("config: bad PINN settings");
  return p;
}

}  // namespace

ModelSpec parse_model_spec(const std::string& text) { return model_of(json::parse(text)); }

ExperimentConfig parse_experiment(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig cfg;
  cfg.name = j.value("name", cfg.name);
  if (j.contains("model")) cfg.model = model_of(j["model"]);
  if (j.contains("initial")) {
    const json& i = j["initial"];
    if (i.contains("q")) cfg.q0 = vec_of(i["q"]);
    if (i.contains("u")) cfg.u0 = vec_of(i["u"]);
  }
  cfg.t_end = j.value("t_end", cfg.t_end);
  if (j.contains("oracle")) {
    const json& o = j["oracle"];
    if (o.is_boolean()) {
      cfg.oracle = o.get<bool>();
    } else {
      cfg.oracle = o.value("enabled", true);
      cfg.oracle_opt.event_tol = o.value("event_tol", cfg.oracle_opt.event_tol);
      cfg.oracle_opt.rtol = o.value("rtol", cfg.oracle_opt.rtol);
      cfg.oracle_opt.atol = o.value("atol", cfg.oracle_opt.atol);
    }
  }
  for (const auto& mj : j.value("methods", json::array())) {
    MethodSpec ms;
    const std::string name = mj.at("method").get<std::string>();
    const auto m = parse_method(name);
    if (!m) throw std::invalid_argument("config: unknown method " + name);
    ms.method = *m;
    ms.dt = mj.at("dt").get<double>();
    ms.order = mj.value("order", ms.order);
    ms.seed = mj.value("seed", ms.seed);
    if (!(ms.dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
    if (ms.order < 1 || ms.order > 100) throw std::invalid_argument("config: order must be in [1, 100]");
    cfg.methods.push_back(ms);
  }
  if (j.contains("quantities")) cfg.quantities = j["quantities"].get<std::vector<std::string>>();
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.threads = j.value("threads", cfg.threads);
  if (j.contains("pinn")) cfg.pinn = pinn_of(j["pinn"]);
  if (!(cfg.t_end > 0.0)) throw std::invalid_argument("config: t_end must be positive");
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_experiment(ss.str());
}

}  // namespace nspinn
