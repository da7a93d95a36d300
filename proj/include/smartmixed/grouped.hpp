#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "smartmixed/network.hpp"

namespace smartmixed {

/// Frozen per-neuron activation choice, one vector per hidden layer.
struct ActivationAssignment {
  std::vector<std::vector<ActivationKind>> layers;
};

/// Per hidden layer, the ascending neuron indices that picked each kind.
/// The groups of a layer always partition 0..n_l-1.
struct LayerGroups {
  std::array<std::vector<std::size_t>, kActivationCount> members;

  std::size_t nonempty() const {
    std::size_t c = 0;
    for (const auto& g : members) c += g.empty() ? 0 : 1;
    return c;
  }
};

struct ActivationGroups {
  std::vector<LayerGroups> layers;
};

/// Phase-2 network: weights transferred from Phase 1, activations fixed.
struct NetworkMixed {
  std::vector<std::size_t> architecture;
  std::vector<DenseLayer> layers;
  ActivationAssignment assignment;
  ActivationGroups groups;
  ActivationParams params;

  std::size_t hidden_layers() const { return assignment.layers.size(); }
};

struct GroupedLayerCache {
  Matrix input;  // batch x n_{l-1}
  Matrix pre;    // batch x n_l (hidden layers; empty for output)
};

struct GroupedCache {
  std::vector<GroupedLayerCache> layers;
  std::size_t batch = 0;
  /// Activation kernel invocations per hidden layer on the last forward;
  /// equals the number of nonempty groups, at most kActivationCount.
  std::vector<std::size_t> kernel_invocations;
};

/// Per-neuron argmax over the learned logits; ties go to the lowest index.
ActivationAssignment extract_assignment(const NetworkPhase1& net);

ActivationGroups build_groups(const ActivationAssignment& assignment);

/// Deep-copies weights and biases and fixes every neuron to its max-logit
/// activation. The result shares no storage with the source network.
NetworkMixed freeze(const NetworkPhase1& net);

/// Builds a mixed network directly with one activation everywhere (the
/// fixed-activation baselines).
NetworkMixed make_uniform_mixed(const std::vector<std::size_t>& architecture,
                                ActivationKind kind, std::uint64_t seed);

std::pair<Matrix, GroupedCache> grouped_forward(const NetworkMixed& net,
                                                const Matrix& x);

/// Forward without cache bookkeeping, for evaluation loops.
Matrix grouped_infer(const NetworkMixed& net, const Matrix& x);

/// Weight and bias gradients (the logits are gone in Phase 2).
Gradients grouped_backward(const NetworkMixed& net, const GroupedCache& cache,
                           const Matrix& dL_dout);

OptimizerState init_optimizer(const NetworkMixed& net, const AdamConfig& cfg);

void adam_step(NetworkMixed& net, const Gradients& grads, OptimizerState& opt);

/// Total parameter count (weights + biases [+ selection logits]).
std::size_t parameter_count(const NetworkPhase1& net);
std::size_t parameter_count(const NetworkMixed& net);

}  // namespace smartmixed
