#pragma once

#include <array>
#include <cstddef>
#include <utility>

#include "smartmixed/activations.hpp"
#include "smartmixed/matrix.hpp"
#include "smartmixed/rng.hpp"

namespace smartmixed {

/// Granularity of the stochastic activation selection.
///   PerBatch:  one draw per neuron per forward call, shared by the batch.
///   PerSample: an independent draw per (sample, neuron).
///   Zero:      no noise; selection is the plain logit argmax (evaluation).
enum class NoiseMode { PerBatch, PerSample, Zero };

/// Learnable per-neuron preferences over the activation pool.
struct SelectionState {
  Matrix logits;  // n x kActivationCount, one row per neuron
  double tau = 1.0;
  double eps = 1e-20;

  SelectionState() = default;
  explicit SelectionState(std::size_t n) : logits(n, kActivationCount) {}
  std::size_t neurons() const { return logits.rows; }
};

/// Everything the backward pass needs from one selection forward.
/// Selection-event rows are per neuron (PerBatch/Zero) or per
/// (sample, neuron) pair, row index b*n + i (PerSample).
struct SelectionCache {
  NoiseMode mode = NoiseMode::PerBatch;
  Matrix noise;                  // events x 6
  Matrix soft;                   // events x 6, rows sum to 1
  Matrix hard;                   // events x 6, one-hot rows
  std::vector<std::size_t> selected;  // argmax per event
  Matrix pre;                    // batch x n
  std::array<Matrix, kActivationCount> act;  // sigma_j(pre), each batch x n

  std::size_t events() const { return soft.rows; }
};

/// Scalar inverse-CDF transform of a uniform draw into Gumbel(0,1).
double gumbel_from_uniform(double v, double eps);

/// rows x cols matrix of Gumbel(0,1) noise.
Matrix gumbel_noise(Rng& rng, std::size_t rows, std::size_t cols, double eps);

/// softmax(z / tau) with max subtraction. Throws InvalidTemperature.
Vector tempered_softmax(const Vector& z, double tau);

/// Hard one-hot of the argmax. The associated backward treats the
/// hardening step as identity; mixed_backward implements that.
Vector st_hard(const Vector& y);

/// Row-wise softmax of the logits at tau = 1 (the categorical
/// distribution the noisy argmax samples from).
Matrix selection_probs(const Matrix& logits);

/// Forward with explicit noise (rows = selection events). The output
/// column for neuron i is exactly sigma_{j*}(u[.,i]) for the selected j*.
std::pair<Matrix, SelectionCache> mixed_forward(const Matrix& u,
                                                const SelectionState& state,
                                                const Matrix& noise,
                                                NoiseMode mode,
                                                const ActivationParams& params);

/// Convenience overload drawing the noise from rng per the mode.
std::pair<Matrix, SelectionCache> mixed_forward(const Matrix& u,
                                                const SelectionState& state,
                                                Rng& rng, NoiseMode mode,
                                                const ActivationParams& params);

/// Gradients for the pre-activations and the selection logits.
/// The pre-activation path uses the hard selection (only sigma'_{j*}
/// flows); the logit path composes the straight-through identity with
/// the tempered-softmax Jacobian (1/tau) * y_j (delta_jm - y_m).
std::pair<Matrix, Matrix> mixed_backward(const Matrix& dL_da,
                                         const SelectionCache& cache,
                                         const SelectionState& state,
                                         const ActivationParams& params);

}  // namespace smartmixed
