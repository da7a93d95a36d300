#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "smartmixed/gumbel.hpp"
#include "smartmixed/matrix.hpp"

namespace smartmixed {

struct DenseLayer {
  Matrix w;  // out x in
  Vector b;  // out
};

/// Phase-1 network: dense layers with per-neuron selectable activations on
/// every hidden layer; the output layer is affine only.
struct NetworkPhase1 {
  std::vector<std::size_t> architecture;
  std::vector<DenseLayer> layers;          // architecture.size() - 1
  std::vector<SelectionState> selections;  // one per hidden layer
  ActivationParams params;
  double tau = 1.0;
  double eps = 1e-20;

  std::size_t hidden_layers() const { return selections.size(); }

  /// tau/eps live both here and on each SelectionState; this keeps them
  /// in step.
  void set_temperature(double new_tau, double new_eps);
};

struct LayerCache {
  Matrix input;        // batch x n_{l-1}
  SelectionCache sel;  // hidden layers only (empty for the output layer)
  bool has_selection = false;
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  std::size_t batch = 0;
};

struct Gradients {
  std::vector<Matrix> w;       // per layer
  std::vector<Vector> b;       // per layer
  std::vector<Matrix> logits;  // per hidden layer
};

/// Weights Kaiming-uniform in (-sqrt(6/fan_in), +sqrt(6/fan_in)), biases and
/// selection logits zero. Deterministic in the seed.
NetworkPhase1 init_network(const std::vector<std::size_t>& architecture,
                           std::uint64_t seed);

/// Hidden layers run the stochastic mixed activation; the final layer emits
/// class logits. The cache retains everything backward needs.
std::pair<Matrix, ForwardCache> forward(const NetworkPhase1& net,
                                        const Matrix& x, Rng& rng,
                                        NoiseMode mode);

/// Deterministic inference pass: every hidden neuron applies its current
/// max-logit activation, no noise, no caches.
Matrix infer_forward(const NetworkPhase1& net, const Matrix& x);

/// Mean softmax cross-entropy and its gradient w.r.t. the logits.
std::pair<double, Matrix> softmax_xent(const Matrix& logits,
                                       const std::vector<std::size_t>& labels);

Gradients backward(const NetworkPhase1& net, const ForwardCache& cache,
                   const Matrix& dL_dlogits);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double logit_lr_multiplier = 1.0;
};

/// First/second moment accumulators mirroring one parameter tensor.
struct Moments {
  std::vector<double> m;
  std::vector<double> v;
};

struct OptimizerState {
  AdamConfig cfg;
  long long step = 0;
  std::vector<Moments> w;
  std::vector<Moments> b;
  std::vector<Moments> logits;
};

OptimizerState init_optimizer(const NetworkPhase1& net, const AdamConfig& cfg);

/// One Adam update over every parameter tensor (weights, biases, logits).
void adam_step(NetworkPhase1& net, const Gradients& grads,
               OptimizerState& opt);

/// Core update rule shared by both phases; exposed for direct testing.
void adam_update_tensor(std::vector<double>& param,
                        const std::vector<double>& grad, Moments& mom,
                        const AdamConfig& cfg, long long step, double lr);

}  // namespace smartmixed
