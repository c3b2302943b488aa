#include "nspinn/nn.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nspinn/lbfgs.hpp"
#include "nspinn/simd.hpp"

namespace nspinn {
namespace {

double softplus(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))); }

double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

}  // namespace

double activate(const ActivationKind& k, double a) {
  switch (k.kind) {
    case Activation::tanh: return std::tanh(a);
    case Activation::mish: return a * std::tanh(softplus(a));
    case Activation::relu: return a > 0.0 ? a : 0.0;
    case Activation::modified_relu: return std::max(0.0, a + k.c1) + k.c2;
  }
  return 0.0;
}

double activate_derivative(const ActivationKind& k, double a) {
  switch (k.kind) {
    case Activation::tanh: {
      const double t = std::tanh(a);
      return 1.0 - t * t;
    }
    case Activation::mish: {
      const double t = std::tanh(softplus(a));
      return t + a * (1.0 - t * t) * sigmoid(a);
    }
    case Activation::relu: return a > 0.0 ? 1.0 : 0.0;
    case Activation::modified_relu: return a + k.c1 > 0.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

std::string to_string(const ActivationKind& k) {
  switch (k.kind) {
    case Activation::tanh: return "tanh";
    case Activation::mish: return "mish";
    case Activation::relu: return "relu";
    case Activation::modified_relu: {
      std::ostringstream os;
      os.precision(17);
      os << "modified_relu(" << k.c1 << "," << k.c2 << ")";
      return os.str();
    }
  }
  return "unknown";
}

std::optional<ActivationKind> parse_activation(const std::string& s) {
  if (s == "tanh") return ActivationKind{Activation::tanh};
  if (s == "mish") return ActivationKind{Activation::mish};
  if (s == "relu") return ActivationKind{Activation::relu};
  if (s == "modified_relu") return ActivationKind{Activation::modified_relu};
  const std::string pre = "modified_relu(";
  if (s.rfind(pre, 0) == 0 && s.back() == ')') {
    const std::string body = s.substr(pre.size(), s.size() - pre.size() - 1);
    const auto comma = body.find(',');
    if (comma == std::string::npos) return std::nullopt;
    try {
      return ActivationKind{Activation::modified_relu, std::stod(body.substr(0, comma)),
                            std::stod(body.substr(comma + 1))};
    } catch (...) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

Fnn::Fnn(std::vector<int> widths, ActivationKind hidden, bool output_bias,
         std::optional<ActivationKind> output_activation)
    : widths_(std::move(widths)), output_bias_(output_bias), out_act_(output_activation) {
  if (widths_.size() < 2) throw std::invalid_argument("Fnn: need at least input and output widths");
  for (int w : widths_)
    if (w <= 0) throw std::invalid_argument("Fnn: widths must be positive");
  hidden_.assign(widths_.size() - 2, hidden);
  std::size_t off = 0;
  for (int l = 0; l < layers(); ++l) {
    w_off_.push_back(off);
    off += static_cast<std::size_t>(widths_[l + 1]) * widths_[l];
    b_off_.push_back(off);
    if (has_bias(l)) off += widths_[l + 1];
  }
  params_.assign(off, 0.0);
}

void Fnn::init_xavier(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::fill(params_.begin(), params_.end(), 0.0);
  for (int l = 0; l < layers(); ++l) {
    const int fan_in = widths_[l], fan_out = widths_[l + 1];
    const double lim = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-lim, lim);
    double* w = weights(l);
    for (int i = 0; i < fan_in * fan_out; ++i) w[i] = dist(rng);
  }
}

NetWorkspace::NetWorkspace(const Fnn& net) {
  const int L = net.layers();
  z_.resize(L);
  a_.resize(L + 1);
  delta_.resize(L);
  for (int l = 0; l < L; ++l) {
    z_[l].resize(net.widths()[l + 1]);
    a_[l + 1].resize(net.widths()[l + 1]);
    delta_[l].resize(net.widths()[l + 1]);
  }
  a_[0].resize(net.widths()[0]);
}

const Vec& NetWorkspace::forward(const Fnn& net, const double* params, const Vec& input) {
  if (input.size() != net.input_size()) throw std::invalid_argument("forward: input size mismatch");
  const auto& K = simd::kernels();
  const int L = net.layers();
  a_[0] = input;
  for (int l = 0; l < L; ++l) {
    const int in = net.widths()[l], out = net.widths()[l + 1];
    const double* W = params + net.weight_offset(l);
    const double* b = net.has_bias(l) ? params + net.bias_offset(l) : nullptr;
    K.gemv(W, a_[l].data(), b, z_[l].data(), out, in);
    if (l < L - 1) {
      const ActivationKind& act = net.hidden_activations()[l];
      for (int i = 0; i < out; ++i) a_[l + 1](i) = activate(act, z_[l](i));
    } else if (net.output_activation()) {
      for (int i = 0; i < out; ++i) a_[l + 1](i) = activate(*net.output_activation(), z_[l](i));
    } else {
      a_[l + 1] = z_[l];
    }
  }
  return a_[L];
}

void NetWorkspace::backward(const Fnn& net, const double* params, const Vec& dout, double* grad) {
  const auto& K = simd::kernels();
  const int L = net.layers();
  std::fill(grad, grad + net.num_params(), 0.0);
  Vec& dl = delta_[L - 1];
  if (net.output_activation()) {
    for (Eigen::Index i = 0; i < dl.size(); ++i)
      dl(i) = dout(i) * activate_derivative(*net.output_activation(), z_[L - 1](i));
  } else {
    dl = dout;
  }
  for (int l = L - 1; l >= 0; --l) {
    const int in = net.widths()[l], out = net.widths()[l + 1];
    K.ger(1.0, delta_[l].data(), a_[l].data(), grad + net.weight_offset(l), out, in);
    if (net.has_bias(l)) {
      double* gb = grad + net.bias_offset(l);
      for (int i = 0; i < out; ++i) gb[i] = delta_[l](i);
    }
    if (l > 0) {
      Vec& prev = delta_[l - 1];
      K.gemv_t(params + net.weight_offset(l), delta_[l].data(), prev.data(), out, in);
      const ActivationKind& act = net.hidden_activations()[l - 1];
      for (int i = 0; i < in; ++i) prev(i) *= activate_derivative(act, z_[l - 1](i));
    }
  }
}

Vec forward(const Fnn& net, const Vec& input) {
  NetWorkspace ws(net);
  return ws.forward(net, net.params().data(), input);
}

double gradient(const Fnn& net, const OutputLoss& loss, const Vec& input, Vec& grad) {
  NetWorkspace ws(net);
  const Vec& out = ws.forward(net, net.params().data(), input);
  Vec dout(out.size());
  const double L = loss(out, &dout);
  grad.resize(static_cast<Eigen::Index>(net.num_params()));
  ws.backward(net, net.params().data(), dout, grad.data());
  return L;
}

std::string fnn_to_json(const Fnn& net) {
  nlohmann::json j;
  j["format"] = "nspinn.fnn.v1";
  j["layer_widths"] = net.widths();
  std::vector<std::string> acts;
  for (const auto& a : net.hidden_activations()) acts.push_back(to_string(a));
  j["hidden_activations"] = acts;
  j["output_bias"] = net.output_bias();
  j["output_activation"] = net.output_activation() ? nlohmann::json(to_string(*net.output_activation()))
                                                   : nlohmann::json(nullptr);
  nlohmann::json layers = nlohmann::json::array();
  for (int l = 0; l < net.layers(); ++l) {
    const int n = net.widths()[l + 1] * net.widths()[l];
    nlohmann::json layer;
    layer["weights"] = std::vector<double>(net.weights(l), net.weights(l) + n);
    if (net.has_bias(l))
      layer["bias"] = std::vector<double>(net.bias(l), net.bias(l) + net.widths()[l + 1]);
    layers.push_back(layer);
  }
  j["layers"] = layers;
  return j.dump(1);
}

Fnn fnn_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const auto widths = j.at("layer_widths").get<std::vector<int>>();
  const auto acts = j.at("hidden_activations").get<std::vector<std::string>>();
  std::optional<ActivationKind> out_act;
  if (!j.at("output_activation").is_null()) {
    out_act = parse_activation(j.at("output_activation").get<std::string>());
    if (!out_act) throw std::runtime_error("fnn_from_json: bad output activation");
  }
  Fnn net(widths, ActivationKind{}, j.at("output_bias").get<bool>(), out_act);
  if (acts.size() != widths.size() - 2) throw std::runtime_error("fnn_from_json: activation count");
  for (std::size_t i = 0; i < acts.size(); ++i) {
    auto a = parse_activation(acts[i]);
    if (!a) throw std::runtime_error("fnn_from_json: bad activation " + acts[i]);
    net.set_hidden_activation(static_cast<int>(i), *a);
  }
  const auto& layers = j.at("layers");
  if (layers.size() != static_cast<std::size_t>(net.layers()))
    throw std::runtime_error("fnn_from_json: layer count");
  for (int l = 0; l < net.layers(); ++l) {
    const auto w = layers[l].at("weights").get<std::vector<double>>();
    if (w.size() != static_cast<std::size_t>(widths[l + 1] * widths[l]))
      throw std::runtime_error("fnn_from_json: weight shape");
    std::copy(w.begin(), w.end(), net.weights(l));
    if (net.has_bias(l)) {
      const auto b = layers[l].at("bias").get<std::vector<double>>();
      if (b.size() != static_cast<std::size_t>(widths[l + 1]))
        throw std::runtime_error("fnn_from_json: bias shape");
      std::copy(b.begin(), b.end(), net.bias(l));
    }
  }
  return net;
}

void save_fnn(const Fnn& net, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_fnn: cannot open " + path);
  os << fnn_to_json(net) << "\n";
}

Fnn load_fnn(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_fnn: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return fnn_from_json(ss.str());
}

std::pair<Fnn, TrainReport> train_lbfgs(const Fnn& net_in, const OutputLoss& loss, const Vec& input,
                                        const TrainOptions& opt) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("train_lbfgs: tol must be positive");
  Fnn net = net_in;
  if (opt.seed) net.init_xavier(*opt.seed);
  NetWorkspace ws(net);
  Vec dout(net.output_size());
  Objective obj = [&](const Vec& p, Vec& g) {
    const Vec& out = ws.forward(net, p.data(), input);
    const double L = loss(out, &dout);
    if (!std::isfinite(L)) return L;
    ws.backward(net, p.data(), dout, g.data());
    return L;
  };
  LbfgsOptions lo;
  lo.memory = opt.memory;
  lo.max_iter = opt.max_iter;
  lo.f_tol = opt.tol;
  Vec p0 = Eigen::Map<const Vec>(net.params().data(), static_cast<Eigen::Index>(net.num_params()));
  LbfgsResult r = minimize_lbfgs(obj, std::move(p0), lo);
  std::copy(r.x.data(), r.x.data() + r.x.size(), net.params().begin());
  TrainReport rep;
  rep.final_loss = r.f;
  rep.iterations = r.iterations;
  rep.converged = r.status == LbfgsStatus::converged;
  rep.grad_norm = r.grad_norm;
  rep.non_finite = r.non_finite_seen;
  rep.evaluations = r.evaluations;
  return {std::move(net), rep};
}

}  // namespace nspinn
