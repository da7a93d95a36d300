#include "smartmixed/network.hpp"

#include <cmath>
#include <string>

#include "smartmixed/errors.hpp"

namespace smartmixed {

NetworkPhase1 init_network(const std::vector<std::size_t>& architecture,
                           std::uint64_t seed) {
  if (architecture.size() < 2) {
    throw ConfigError("architecture needs at least an input and output layer");
  }
  for (std::size_t w : architecture) {
    if (w < 1) {
      throw ConfigError("layer widths must be >= 1");
    }
  }
  NetworkPhase1 net;
  net.architecture = architecture;
  Rng root(seed);
  for (std::size_t l = 0; l + 1 < architecture.size(); ++l) {
    const std::size_t fan_in = architecture[l];
    const std::size_t fan_out = architecture[l + 1];
    DenseLayer layer;
    layer.w = Matrix(fan_out, fan_in);
    layer.b = Vector(fan_out, 0.0);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    Rng lr = root.child(l);
    for (double& x : layer.w.data) {
      x = (2.0 * lr.next_double() - 1.0) * bound;
    }
    net.layers.push_back(std::move(layer));
  }
  // Hidden layers only; zero logits give a uniform prior over the pool.
  for (std::size_t l = 1; l + 1 < architecture.size(); ++l) {
    net.selections.emplace_back(architecture[l]);
  }
  net.set_temperature(net.tau, net.eps);
  return net;
}

void NetworkPhase1::set_temperature(double new_tau, double new_eps) {
  tau = new_tau;
  eps = new_eps;
  for (SelectionState& sel : selections) {
    sel.tau = new_tau;
    sel.eps = new_eps;
  }
}

std::pair<Matrix, ForwardCache> forward(const NetworkPhase1& net,
                                        const Matrix& x, Rng& rng,
                                        NoiseMode mode) {
  if (x.cols != net.architecture.front()) {
    throw DimensionError("forward: input width " + std::to_string(x.cols) +
                         " != architecture input " +
                         std::to_string(net.architecture.front()));
  }
  ForwardCache cache;
  cache.batch = x.rows;
  Matrix act = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    LayerCache lc;
    lc.input = act;
    Matrix u = affine_forward(act, net.layers[l].w, net.layers[l].b);
    if (l + 1 < net.layers.size()) {
      auto [a, sel] =
          mixed_forward(u, net.selections[l], rng, mode, net.params);
      lc.sel = std::move(sel);
      lc.has_selection = true;
      act = std::move(a);
    } else {
      act = std::move(u);
    }
    cache.layers.push_back(std::move(lc));
  }
  return {std::move(act), std::move(cache)};
}

Matrix infer_forward(const NetworkPhase1& net, const Matrix& x) {
  Matrix act = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Matrix u = affine_forward(act, net.layers[l].w, net.layers[l].b);
    if (l + 1 < net.layers.size()) {
      const Matrix& logits = net.selections[l].logits;
      for (std::size_t i = 0; i < u.cols; ++i) {
        const ActivationKind kind =
            kAllActivations[argmax(logits.row(i), logits.cols)];
        for (std::size_t b = 0; b < u.rows; ++b) {
          u(b, i) = apply_scalar(kind, u(b, i), net.params);
        }
      }
    }
    act = std::move(u);
  }
  return act;
}

std::pair<double, Matrix> softmax_xent(
    const Matrix& logits, const std::vector<std::size_t>& labels) {
  if (labels.size() != logits.rows) {
    throw DimensionError("softmax_xent: batch size mismatch");
  }
  const std::size_t classes = logits.cols;
  Matrix grad(logits.rows, logits.cols);
  double loss = 0.0;
  const double inv_batch = 1.0 / static_cast<double>(logits.rows);
  for (std::size_t b = 0; b < logits.rows; ++b) {
    if (labels[b] >= classes) {
      throw LabelError("label " + std::to_string(labels[b]) +
                       " out of range [0," + std::to_string(classes) + ")");
    }
    const double* z = logits.row(b);
    double zmax = z[0];
    for (std::size_t j = 1; j < classes; ++j) {
      if (z[j] > zmax) zmax = z[j];
    }
    double sum = 0.0;
    double* g = grad.row(b);
    for (std::size_t j = 0; j < classes; ++j) {
      g[j] = std::exp(z[j] - zmax);
      sum += g[j];
    }
    loss += (std::log(sum) - (z[labels[b]] - zmax)) * inv_batch;
    const double inv_sum = 1.0 / sum;
    for (std::size_t j = 0; j < classes; ++j) {
      g[j] = g[j] * inv_sum * inv_batch;
    }
    g[labels[b]] -= inv_batch;
  }
  return {loss, std::move(grad)};
}

Gradients backward(const NetworkPhase1& net, const ForwardCache& cache,
                   const Matrix& dL_dlogits) {
  if (cache.layers.size() != net.layers.size()) {
    throw CacheError("backward: cache does not match the network");
  }
  if (dL_dlogits.rows != cache.batch ||
      dL_dlogits.cols != net.architecture.back()) {
    throw DimensionError("backward: upstream gradient shape mismatch");
  }
  Gradients grads;
  grads.w.resize(net.layers.size());
  grads.b.resize(net.layers.size());
  grads.logits.resize(net.selections.size());

  Matrix g = dL_dlogits;  // gradient w.r.t. the current layer's output
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const LayerCache& lc = cache.layers[l];
    Matrix gu;
    if (lc.has_selection) {
      auto [du, dlogits] =
          mixed_backward(g, lc.sel, net.selections[l], net.params);
      grads.logits[l] = std::move(dlogits);
      gu = std::move(du);
    } else {
      gu = std::move(g);
    }
    grads.w[l] = matmul(transpose(gu), lc.input);
    grads.b[l] = column_sums(gu);
    if (l > 0) {
      g = matmul(gu, net.layers[l].w);
    }
  }
  return grads;
}

OptimizerState init_optimizer(const NetworkPhase1& net,
                              const AdamConfig& cfg) {
  OptimizerState opt;
  opt.cfg = cfg;
  for (const DenseLayer& layer : net.layers) {
    opt.w.push_back({std::vector<double>(layer.w.size(), 0.0),
                     std::vector<double>(layer.w.size(), 0.0)});
    opt.b.push_back({std::vector<double>(layer.b.size(), 0.0),
                     std::vector<double>(layer.b.size(), 0.0)});
  }
  for (const SelectionState& sel : net.selections) {
    opt.logits.push_back({std::vector<double>(sel.logits.size(), 0.0),
                          std::vector<double>(sel.logits.size(), 0.0)});
  }
  return opt;
}

void adam_update_tensor(std::vector<double>& param,
                        const std::vector<double>& grad, Moments& mom,
                        const AdamConfig& cfg, long long step, double lr) {
  const double b1 = cfg.beta1;
  const double b2 = cfg.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    mom.m[i] = b1 * mom.m[i] + (1.0 - b1) * grad[i];
    mom.v[i] = b2 * mom.v[i] + (1.0 - b2) * grad[i] * grad[i];
    const double mhat = mom.m[i] / bc1;
    const double vhat = mom.v[i] / bc2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

void adam_step(NetworkPhase1& net, const Gradients& grads,
               OptimizerState& opt) {
  if (grads.w.size() != net.layers.size() ||
      grads.logits.size() != net.selections.size()) {
    throw DimensionError("adam_step: gradient structure mismatch");
  }
  ++opt.step;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    adam_update_tensor(net.layers[l].w.data, grads.w[l].data, opt.w[l],
                       opt.cfg, opt.step, opt.cfg.lr);
    adam_update_tensor(net.layers[l].b, grads.b[l], opt.b[l], opt.cfg,
                       opt.step, opt.cfg.lr);
  }
  const double logit_lr = opt.cfg.lr * opt.cfg.logit_lr_multiplier;
  for (std::size_t l = 0; l < net.selections.size(); ++l) {
    adam_update_tensor(net.selections[l].logits.data, grads.logits[l].data,
                       opt.logits[l], opt.cfg, opt.step, logit_lr);
  }
}

}  // namespace smartmixed
