#include "nspinn/lcp_pinn.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

namespace nspinn {

namespace {

Vec net_input(int n, const LcpPinnConfig& cfg) {
  if (cfg.input_values.size() > 0) return cfg.input_values;
  return Vec::Ones(n);
}

struct Attempt {
  Fnn net;
  TrainReport rep;
  bool warm = false;
};

// Activations of the last hidden layer.
Vec last_hidden(const Fnn& net, const Vec& in) {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Vec a = in;
  for (int l = 0; l + 1 < net.layers(); ++l) {
    const int rows = net.widths()[l + 1], cols = net.widths()[l];
    Vec z = Eigen::Map<const RowMat>(net.weights(l), rows, cols) * a;
    z += Eigen::Map<const Vec>(net.bias(l), rows);
    for (int i = 0; i < rows; ++i) z(i) = activate(net.hidden_activations()[l], z(i));
    a = std::move(z);
  }
  return a;
}

// An output on the flat side of the output ReLU gets no gradient and stays
// there. Move each such output that the loss wants larger to its best value
// with the others held fixed, by shifting its pre-activation along the last
// hidden layer's activations.
bool revive_dead_outputs(Fnn& net, const OutputLoss& loss, const Vec& in, const ActivationKind& act) {
  const int L = net.layers();
  const int width = net.widths()[L - 1];
  const Vec h = last_hidden(net, in);
  const double hh = h.squaredNorm();
  if (!(hh > 0.0)) return false;
  bool changed = false;
  for (int i = 0; i < net.output_size(); ++i) {
    double* w = net.weights(L - 1) + static_cast<std::size_t>(i) * width;
    const double pre = Eigen::Map<const Vec>(w, width).dot(h);
    if (pre + act.c1 > 0.0) continue;
    Vec out = forward(net, in);
    Vec dout(out.size());
    const double base = loss(out, &dout);
    if (!(dout(i) < 0.0)) continue;
    auto at = [&](double v) {
      Vec o = out;
      o(i) = v;
      return loss(o, nullptr);
    };
    // Golden-section search for the output value.
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = act.c2, hi = act.c2 + 2.0 * std::max(1.0, out.cwiseAbs().maxCoeff());
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = at(x1), f2 = at(x2);
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = at(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = at(x2);
      }
    }
    const double v = 0.5 * (lo + hi);
    if (!(v > act.c2) || !(at(v) < base)) continue;
    const double shift = (v - act.c2 - act.c1 - pre) / hh;
    for (int c = 0; c < width; ++c) w[c] += shift * h(c);
    changed = true;
  }
  return changed;
}

constexpr int kRevivals = 4;

}  // namespace

Fnn make_lcp_net(int n, const LcpPinnConfig& cfg, std::uint64_t seed) {
  const Vec in = net_input(n, cfg);
  std::vector<int> widths;
  widths.push_back(static_cast<int>(in.size()));
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(2 * n);
  Fnn net(widths, cfg.hidden_activation, false, cfg.activation);
  net.init_xavier(seed);
  const int L = net.layers();
  // Small output weights put every output near the shift c1, inside the
  // active part of the ReLU. Rows still in the flat part are flipped; the
  // uniform draw is symmetric so a flipped row is an equally likely sample.
  for (std::size_t i = 0; i < static_cast<std::size_t>(2 * n) * widths[L - 1]; ++i)
    net.weights(L - 1)[i] *= cfg.output_init_scale;
  Fnn linear(widths, cfg.hidden_activation, false, std::nullopt);
  linear.params() = net.params();
  const Vec pre = forward(linear, in);
  for (int i = 0; i < 2 * n; ++i) {
    if (pre(i) + cfg.activation.c1 <= 0.0) {
      double* w = net.weights(L - 1) + static_cast<std::size_t>(i) * widths[L - 1];
      for (int c = 0; c < widths[L - 1]; ++c) w[c] = -w[c];
    }
  }
  return net;
}

LcpPinnResult solve_lcp_pinn_detailed(const LcpProblem& p, const LcpPinnConfig& cfg, const Fnn* warm) {
  if (!p.well_formed()) throw std::invalid_argument("solve_lcp_pinn: malformed problem");
  const int n = p.size();
  const LcpScaling sc = LcpScaling::compute(p, cfg.equilibrate);
  const LcpProblem q = sc.apply(p);
  const Vec in = net_input(n, cfg);
  const double inv_n = n > 0 ? 1.0 / n : 0.0;

  OutputLoss loss = [&](const Vec& out, Vec* dout) {
    const auto x = out.head(n);
    const auto y = out.tail(n);
    const Vec f = y - q.A * x - q.b;
    const Vec r = x.cwiseProduct(y);
    if (dout) {
      dout->head(n) = 2.0 * inv_n * (-(q.A.transpose() * f) + r.cwiseProduct(y));
      dout->tail(n) = 2.0 * inv_n * (f + r.cwiseProduct(x));
    }
    return (f.squaredNorm() + r.squaredNorm()) * inv_n;
  };

  TrainOptions topt;
  topt.tol = cfg.tol;
  topt.max_iter = cfg.max_iter;

  LcpPinnResult res;
  bool have_best = false;
  auto consider = [&](Attempt&& a) {
    ++res.attempts;
    if (!have_best || a.rep.final_loss < res.report.final_loss) {
      res.net = std::move(a.net);
      res.report = a.rep;
      res.warm_start_used = a.warm;
      have_best = true;
    }
    return res.report.converged;
  };

  const bool relu_out = cfg.activation.kind == Activation::modified_relu || cfg.activation.kind == Activation::relu;
  auto train = [&](const Fnn& start) {
    auto [net, rep] = train_lbfgs(start, loss, in, topt);
    int total = rep.iterations;
    for (int k = 0; relu_out && !rep.converged && k < kRevivals; ++k) {
      if (!revive_dead_outputs(net, loss, in, cfg.activation)) break;
      std::tie(net, rep) = train_lbfgs(net, loss, in, topt);
      total += rep.iterations;
    }
    rep.iterations = total;
    return std::pair{std::move(net), rep};
  };

  bool done = false;
  if (warm && warm->widths().size() >= 2 && warm->output_size() == 2 * n &&
      warm->input_size() == in.size()) {
    auto [net, rep] = train(*warm);
    done = consider({std::move(net), rep, true});
  }
  for (int k = 0; !done && k <= cfg.restarts; ++k) {
    auto [net, rep] = train(make_lcp_net(n, cfg, cfg.seed + 7919ull * static_cast<std::uint64_t>(k)));
    done = consider({std::move(net), rep, false});
  }

  const Vec out = forward(res.net, in);
  Vec xs = out.head(n), ys = out.tail(n);
  res.scaled_residual = lcp_residual(q, xs, ys);
  if (cfg.polish && n > 0) {
    // At degenerate solutions the x_i > y_i basis can be singular (a zero
    // diagonal with a free partner). Fall back to that basis with one index
    // toggled, then to every index whose y vanishes.
    std::vector<int> larger(n), vanishing(n);
    for (int i = 0; i < n; ++i) {
      larger[i] = xs(i) > ys(i);
      vanishing[i] = ys(i) <= std::sqrt(cfg.tol);
    }
    std::vector<std::vector<int>> candidates{larger};
    for (int j = 0; j < n; ++j) {
      candidates.push_back(larger);
      candidates.back()[j] ^= 1;
    }
    candidates.push_back(vanishing);
    for (const auto& basic : candidates) {
      Vec xp, yp;
      if (!solve_principal(q, basic, xp, yp, kLcpDefaultTol)) continue;
      const double r = lcp_residual(q, xp, yp);
      if (r < res.scaled_residual) {
        xs = xp;
        ys = yp;
        res.scaled_residual = r;
        res.polished = true;
        break;
      }
    }
  }
  Vec x, y;
  sc.map(xs, ys, x, y);
  res.solution.x = x;
  res.solution.y = y;
  res.solution.residual = lcp_residual(p, x, y);
  res.solution.iterations = res.report.iterations;
  res.solution.status = res.scaled_residual <= cfg.tol ? LcpStatus::solved : LcpStatus::not_converged;
  return res;
}

LcpSolution solve_lcp_pinn(const LcpProblem& p, const LcpPinnConfig& cfg) {
  return solve_lcp_pinn_detailed(p, cfg).solution;
}

}  // namespace nspinn
