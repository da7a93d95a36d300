#include "smartmixed/gumbel.hpp"

#include <cmath>
#include <string>

#include "smartmixed/errors.hpp"

namespace smartmixed {

double gumbel_from_uniform(double v, double eps) {
  return -std::log(-std::log(v + eps) + eps);
}

Matrix gumbel_noise(Rng& rng, std::size_t rows, std::size_t cols, double eps) {
  Matrix g(rows, cols);
  for (double& x : g.data) {
    x = gumbel_from_uniform(rng.next_double(), eps);
  }
  detail::debug_check_finite(g, "gumbel_noise");
  return g;
}

namespace {

void softmax_row(const double* z, double* y, std::size_t n, double tau) {
  double zmax = z[0];
  for (std::size_t j = 1; j < n; ++j) {
    if (z[j] > zmax) zmax = z[j];
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    y[j] = std::exp((z[j] - zmax) / tau);
    sum += y[j];
  }
  for (std::size_t j = 0; j < n; ++j) {
    y[j] /= sum;
  }
}

void check_tau(double tau) {
  if (!(tau > 0.0)) {
    throw InvalidTemperature("temperature must be > 0, got " +
                             std::to_string(tau));
  }
}

}  // namespace

Vector tempered_softmax(const Vector& z, double tau) {
  check_tau(tau);
  if (z.empty()) {
    throw EmptyInputError("tempered_softmax: empty input");
  }
  Vector y(z.size());
  softmax_row(z.data(), y.data(), z.size(), tau);
  return y;
}

Vector st_hard(const Vector& y) {
  Vector h(y.size(), 0.0);
  h[argmax(y)] = 1.0;
  return h;
}

Matrix selection_probs(const Matrix& logits) {
  Matrix p(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    softmax_row(logits.row(i), p.row(i), logits.cols, 1.0);
  }
  return p;
}

std::pair<Matrix, SelectionCache> mixed_forward(
    const Matrix& u, const SelectionState& state, const Matrix& noise,
    NoiseMode mode, const ActivationParams& params) {
  const std::size_t n = state.neurons();
  const std::size_t batch = u.rows;
  if (u.cols != n) {
    throw DimensionError("mixed_forward: u has " + std::to_string(u.cols) +
                         " columns but state has " + std::to_string(n) +
                         " neurons");
  }
  check_tau(state.tau);
  const std::size_t events = mode == NoiseMode::PerSample ? batch * n : n;
  if (noise.rows != events || noise.cols != kActivationCount) {
    throw DimensionError("mixed_forward: noise shape mismatch");
  }

  SelectionCache cache;
  cache.mode = mode;
  cache.noise = noise;
  cache.pre = u;
  cache.soft = Matrix(events, kActivationCount);
  cache.hard = Matrix(events, kActivationCount);
  cache.selected.resize(events);

  for (std::size_t e = 0; e < events; ++e) {
    const std::size_t i = mode == NoiseMode::PerSample ? e % n : e;
    double z[kActivationCount];
    const double* alpha = state.logits.row(i);
    const double* g = noise.row(e);
    for (std::size_t j = 0; j < kActivationCount; ++j) {
      z[j] = alpha[j] + g[j];
    }
    softmax_row(z, cache.soft.row(e), kActivationCount, state.tau);
    const std::size_t sel = argmax(cache.soft.row(e), kActivationCount);
    cache.selected[e] = sel;
    cache.hard(e, sel) = 1.0;
  }

  // All candidate outputs are cached: backward needs sigma_j(u) for every j
  // to route gradient into the logits.
  for (std::size_t j = 0; j < kActivationCount; ++j) {
    Matrix& aj = cache.act[j];
    aj = Matrix(batch, n);
    const ActivationKind kind = kAllActivations[j];
    for (std::size_t idx = 0; idx < u.data.size(); ++idx) {
      aj.data[idx] = apply_scalar(kind, u.data[idx], params);
    }
  }

  // The one-hot selection makes the weighted sum collapse to the selected
  // candidate, so the output column is copied from it verbatim.
  Matrix a(batch, n);
  for (std::size_t b = 0; b < batch; ++b) {
    double* arow = a.row(b);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t e = mode == NoiseMode::PerSample ? b * n + i : i;
      arow[i] = cache.act[cache.selected[e]](b, i);
    }
  }
  detail::debug_check_finite(a, "mixed_forward");
  return {std::move(a), std::move(cache)};
}

std::pair<Matrix, SelectionCache> mixed_forward(
    const Matrix& u, const SelectionState& state, Rng& rng, NoiseMode mode,
    const ActivationParams& params) {
  const std::size_t events =
      mode == NoiseMode::PerSample ? u.rows * state.neurons()
                                   : state.neurons();
  Matrix noise = mode == NoiseMode::Zero
                     ? Matrix(events, kActivationCount)
                     : gumbel_noise(rng, events, kActivationCount, state.eps);
  return mixed_forward(u, state, noise, mode, params);
}

std::pair<Matrix, Matrix> mixed_backward(const Matrix& dL_da,
                                         const SelectionCache& cache,
                                         const SelectionState& state,
                                         const ActivationParams& params) {
  const std::size_t batch = cache.pre.rows;
  const std::size_t n = cache.pre.cols;
  if (dL_da.rows != batch || dL_da.cols != n) {
    throw DimensionError("mixed_backward: upstream gradient shape mismatch");
  }
  if (state.neurons() != n) {
    throw CacheError("mixed_backward: cache does not match state");
  }
  const double inv_tau = 1.0 / state.tau;

  Matrix dL_du(batch, n);
  Matrix dL_dlogits(n, kActivationCount);

  // Pre-activation path: only the selected candidate's derivative flows.
  for (std::size_t b = 0; b < batch; ++b) {
    const double* grow = dL_da.row(b);
    const double* urow = cache.pre.row(b);
    double* orow = dL_du.row(b);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t e =
          cache.mode == NoiseMode::PerSample ? b * n + i : i;
      const ActivationKind kind = kAllActivations[cache.selected[e]];
      orow[i] = grow[i] * derivative_scalar(kind, urow[i], params);
    }
  }

  // Logit path: straight-through identity into the softmax Jacobian.
  // With t_j the gradient reaching candidate j of an event,
  // dL/dalpha_m = (1/tau) * y_m * (t_m - sum_j y_j t_j).
  if (cache.mode == NoiseMode::PerSample) {
    for (std::size_t b = 0; b < batch; ++b) {
      const double* grow = dL_da.row(b);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t e = b * n + i;
        const double* y = cache.soft.row(e);
        double t[kActivationCount];
        double dot = 0.0;
        for (std::size_t j = 0; j < kActivationCount; ++j) {
          t[j] = grow[i] * cache.act[j](b, i);
          dot += y[j] * t[j];
        }
        double* drow = dL_dlogits.row(i);
        for (std::size_t m = 0; m < kActivationCount; ++m) {
          drow[m] += inv_tau * y[m] * (t[m] - dot);
        }
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double t[kActivationCount] = {0};
      for (std::size_t j = 0; j < kActivationCount; ++j) {
        const Matrix& aj = cache.act[j];
        double sum = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
          sum += dL_da(b, i) * aj(b, i);
        }
        t[j] = sum;
      }
      const double* y = cache.soft.row(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < kActivationCount; ++j) {
        dot += y[j] * t[j];
      }
      double* drow = dL_dlogits.row(i);
      for (std::size_t m = 0; m < kActivationCount; ++m) {
        drow[m] = inv_tau * y[m] * (t[m] - dot);
      }
    }
  }

  return {std::move(dL_du), std::move(dL_dlogits)};
}

}  // namespace smartmixed
