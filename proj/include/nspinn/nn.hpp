#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nspinn/lcp.hpp"

namespace nspinn {

enum class Activation { tanh, mish, relu, modified_relu };

struct ActivationKind {
  Activation kind = Activation::tanh;
  double c1 = 0.0;  // modified ReLU shift inside the max
  double c2 = 0.0;  // modified ReLU offset added after the max

  static ActivationKind tanh_() { return {Activation::tanh, 0.0, 0.0}; }
  static ActivationKind modified_relu(double c1, double c2) { return {Activation::modified_relu, c1, c2}; }
  bool operator==(const ActivationKind&) const = default;
};

double activate(const ActivationKind& k, double a);
// Derivative; ReLU-family kinks use 0.
double activate_derivative(const ActivationKind& k, double a);

std::string to_string(const ActivationKind& k);
std::optional<ActivationKind> parse_activation(const std::string& s);

// Feedforward network. Hidden layers apply sigma(W a + b); the output layer
// is W a (plus b if output_bias), optionally followed by output_activation.
// Parameters live in one flat vector: per layer row-major W then b.
class Fnn {
 public:
  Fnn() = default;
  Fnn(std::vector<int> widths, ActivationKind hidden, bool output_bias = false,
      std::optional<ActivationKind> output_activation = std::nullopt);

  const std::vector<int>& widths() const { return widths_; }
  int layers() const { return static_cast<int>(widths_.size()) - 1; }
  int input_size() const { return widths_.front(); }
  int output_size() const { return widths_.back(); }
  bool output_bias() const { return output_bias_; }
  const std::vector<ActivationKind>& hidden_activations() const { return hidden_; }
  void set_hidden_activation(int layer, ActivationKind k) { hidden_.at(layer) = k; }
  const std::optional<ActivationKind>& output_activation() const { return out_act_; }

  std::size_t num_params() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  double* weights(int layer) { return params_.data() + w_off_[layer]; }
  const double* weights(int layer) const { return params_.data() + w_off_[layer]; }
  // Null for the output layer when it has no bias.
  double* bias(int layer) { return has_bias(layer) ? params_.data() + b_off_[layer] : nullptr; }
  const double* bias(int layer) const { return has_bias(layer) ? params_.data() + b_off_[layer] : nullptr; }
  bool has_bias(int layer) const { return layer < layers() - 1 || output_bias_; }
  std::size_t weight_offset(int layer) const { return w_off_[layer]; }
  std::size_t bias_offset(int layer) const { return b_off_[layer]; }

  // Xavier-uniform weights, zero biases.
  void init_xavier(std::uint64_t seed);

  bool operator==(const Fnn&) const = default;

 private:
  std::vector<int> widths_;
  std::vector<ActivationKind> hidden_;
  bool output_bias_ = false;
  std::optional<ActivationKind> out_act_;
  std::vector<double> params_;
  std::vector<std::size_t> w_off_, b_off_;
};

Vec forward(const Fnn& net, const Vec& input);

// Scalar loss of the network output; fills dout = dL/dout when non-null.
using OutputLoss = std::function<double(const Vec& out, Vec* dout)>;

// Reverse-mode gradient of loss(forward(net, input)) w.r.t. the flat
// parameter vector. Returns the loss value.
double gradient(const Fnn& net, const OutputLoss& loss, const Vec& input, Vec& grad);

// Reusable buffers for repeated forward/backward passes on one network shape.
class NetWorkspace {
 public:
  explicit NetWorkspace(const Fnn& net);
  const Vec& forward(const Fnn& net, const double* params, const Vec& input);
  // Accumulates nothing; overwrites grad with d(dout . out)/dparams.
  void backward(const Fnn& net, const double* params, const Vec& dout, double* grad);

 private:
  std::vector<Vec> z_, a_;
  std::vector<Vec> delta_;
  Vec out_;
};

std::string fnn_to_json(const Fnn& net);
Fnn fnn_from_json(const std::string& text);
void save_fnn(const Fnn& net, const std::string& path);
Fnn load_fnn(const std::string& path);

struct TrainReport {
  double final_loss = 0.0;
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
  bool non_finite = false;  // a non-finite loss was met during the line search
  int evaluations = 0;
};

struct TrainOptions {
  double tol = 1e-12;
  int max_iter = 1000;
  // When set, the network is re-initialized from this seed before training.
  std::optional<std::uint64_t> seed;
  int memory = 10;
};

std::pair<Fnn, TrainReport> train_lbfgs(const Fnn& net, const OutputLoss& loss, const Vec& input,
                                        const TrainOptions& opt);

}  // namespace nspinn
