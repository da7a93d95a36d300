#include "smartmixed/grouped.hpp"

#include <string>

#include "smartmixed/errors.hpp"

namespace smartmixed {

ActivationAssignment extract_assignment(const NetworkPhase1& net) {
  ActivationAssignment assignment;
  for (const SelectionState& sel : net.selections) {
    std::vector<ActivationKind> kinds(sel.neurons());
    for (std::size_t i = 0; i < sel.neurons(); ++i) {
      kinds[i] = kAllActivations[argmax(sel.logits.row(i), sel.logits.cols)];
    }
    assignment.layers.push_back(std::move(kinds));
  }
  return assignment;
}

ActivationGroups build_groups(const ActivationAssignment& assignment) {
  ActivationGroups groups;
  for (const auto& kinds : assignment.layers) {
    LayerGroups lg;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      lg.members[static_cast<std::size_t>(kinds[i])].push_back(i);
    }
    groups.layers.push_back(std::move(lg));
  }
  return groups;
}

NetworkMixed freeze(const NetworkPhase1& net) {
  NetworkMixed mixed;
  mixed.architecture = net.architecture;
  mixed.layers = net.layers;  // deep copy; Phase 2 must not alias Phase 1
  mixed.assignment = extract_assignment(net);
  mixed.groups = build_groups(mixed.assignment);
  mixed.params = net.params;
  return mixed;
}

NetworkMixed make_uniform_mixed(const std::vector<std::size_t>& architecture,
                                ActivationKind kind, std::uint64_t seed) {
  NetworkPhase1 base = init_network(architecture, seed);
  NetworkMixed mixed;
  mixed.architecture = base.architecture;
  mixed.layers = std::move(base.layers);
  mixed.params = base.params;
  for (std::size_t l = 1; l + 1 < architecture.size(); ++l) {
    mixed.assignment.layers.emplace_back(architecture[l], kind);
  }
  mixed.groups = build_groups(mixed.assignment);
  return mixed;
}

namespace {

/// Gather the group's pre-activations, apply the kind once to the whole
/// subvector, scatter the results back.
void apply_groups(const LayerGroups& groups, Matrix& u,
                  const ActivationParams& params, std::size_t* invocations) {
  std::size_t calls = 0;
  std::vector<double> gathered;
  for (std::size_t j = 0; j < kActivationCount; ++j) {
    const std::vector<std::size_t>& members = groups.members[j];
    if (members.empty()) continue;  // no zero-length kernel calls
    ++calls;
    const ActivationKind kind = kAllActivations[j];
    gathered.resize(members.size() * u.rows);
    std::size_t pos = 0;
    for (std::size_t b = 0; b < u.rows; ++b) {
      const double* urow = u.row(b);
      for (std::size_t i : members) {
        gathered[pos++] = urow[i];
      }
    }
    for (double& x : gathered) {
      x = apply_scalar(kind, x, params);
    }
    pos = 0;
    for (std::size_t b = 0; b < u.rows; ++b) {
      double* urow = u.row(b);
      for (std::size_t i : members) {
        urow[i] = gathered[pos++];
      }
    }
  }
  if (invocations) *invocations = calls;
}

}  // namespace

std::pair<Matrix, GroupedCache> grouped_forward(const NetworkMixed& net,
                                                const Matrix& x) {
  if (x.cols != net.architecture.front()) {
    throw DimensionError("grouped_forward: input width mismatch");
  }
  GroupedCache cache;
  cache.batch = x.rows;
  cache.kernel_invocations.assign(net.hidden_layers(), 0);
  Matrix act = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    GroupedLayerCache lc;
    lc.input = act;
    Matrix u = affine_forward(act, net.layers[l].w, net.layers[l].b);
    if (l + 1 < net.layers.size()) {
      lc.pre = u;
      apply_groups(net.groups.layers[l], u, net.params,
                   &cache.kernel_invocations[l]);
    }
    act = std::move(u);
    cache.layers.push_back(std::move(lc));
  }
  return {std::move(act), std::move(cache)};
}

Matrix grouped_infer(const NetworkMixed& net, const Matrix& x) {
  Matrix act = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Matrix u = affine_forward(act, net.layers[l].w, net.layers[l].b);
    if (l + 1 < net.layers.size()) {
      apply_groups(net.groups.layers[l], u, net.params, nullptr);
    }
    act = std::move(u);
  }
  return act;
}

Gradients grouped_backward(const NetworkMixed& net, const GroupedCache& cache,
                           const Matrix& dL_dout) {
  if (cache.layers.size() != net.layers.size()) {
    throw CacheError("grouped_backward: cache does not match the network");
  }
  if (dL_dout.rows != cache.batch ||
      dL_dout.cols != net.architecture.back()) {
    throw DimensionError("grouped_backward: upstream gradient shape mismatch");
  }
  Gradients grads;
  grads.w.resize(net.layers.size());
  grads.b.resize(net.layers.size());

  Matrix g = dL_dout;
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const GroupedLayerCache& lc = cache.layers[l];
    Matrix gu;
    if (l + 1 < net.layers.size()) {
      // Per-group derivative application mirrors the forward dispatch.
      gu = Matrix(g.rows, g.cols);
      const LayerGroups& groups = net.groups.layers[l];
      for (std::size_t j = 0; j < kActivationCount; ++j) {
        const std::vector<std::size_t>& members = groups.members[j];
        if (members.empty()) continue;
        const ActivationKind kind = kAllActivations[j];
        for (std::size_t b = 0; b < g.rows; ++b) {
          const double* grow = g.row(b);
          const double* urow = lc.pre.row(b);
          double* out = gu.row(b);
          for (std::size_t i : members) {
            out[i] = grow[i] * derivative_scalar(kind, urow[i], net.params);
          }
        }
      }
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

OptimizerState init_optimizer(const NetworkMixed& net, const AdamConfig& cfg) {
  OptimizerState opt;
  opt.cfg = cfg;
  for (const DenseLayer& layer : net.layers) {
    opt.w.push_back({std::vector<double>(layer.w.size(), 0.0),
                     std::vector<double>(layer.w.size(), 0.0)});
    opt.b.push_back({std::vector<double>(layer.b.size(), 0.0),
                     std::vector<double>(layer.b.size(), 0.0)});
  }
  return opt;
}

void adam_step(NetworkMixed& net, const Gradients& grads,
               OptimizerState& opt) {
  if (grads.w.size() != net.layers.size()) {
    throw DimensionError("adam_step: gradient structure mismatch");
  }
  ++opt.step;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    adam_update_tensor(net.layers[l].w.data, grads.w[l].data, opt.w[l],
                       opt.cfg, opt.step, opt.cfg.lr);
    adam_update_tensor(net.layers[l].b, grads.b[l], opt.b[l], opt.cfg,
                       opt.step, opt.cfg.lr);
  }
}

std::size_t parameter_count(const NetworkPhase1& net) {
  std::size_t n = 0;
  for (const DenseLayer& layer : net.layers) {
    n += layer.w.size() + layer.b.size();
  }
  for (const SelectionState& sel : net.selections) {
    n += sel.logits.size();
  }
  return n;
}

std::size_t parameter_count(const NetworkMixed& net) {
  std::size_t n = 0;
  for (const DenseLayer& layer : net.layers) {
    n += layer.w.size() + layer.b.size();
  }
  return n;
}

}  // namespace smartmixed
