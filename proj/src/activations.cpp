#include "smartmixed/activations.hpp"

#include <cmath>

#include "smartmixed/errors.hpp"

namespace smartmixed {

const char* activation_name(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::ReLU:
      return "relu";
    case ActivationKind::Sigmoid:
      return "sigmoid";
    case ActivationKind::Tanh:
      return "tanh";
    case ActivationKind::LeakyReLU:
      return "leaky_relu";
    case ActivationKind::ELU:
      return "elu";
    case ActivationKind::SELU:
      return "selu";
  }
  throw ConfigError("activation_name: bad discriminant");
}

ActivationKind activation_from_name(const std::string& name) {
  for (ActivationKind kind : kAllActivations) {
    if (name == activation_name(kind)) {
      return kind;
    }
  }
  throw ConfigError("unknown activation name: '" + name + "'");
}

double apply_scalar(ActivationKind kind, double x, const ActivationParams& p) {
  switch (kind) {
    case ActivationKind::ReLU:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::Sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::Tanh:
      return std::tanh(x);
    case ActivationKind::LeakyReLU:
      return x >= 0.0 ? x : p.leaky_slope * x;
    case ActivationKind::ELU:
      return x >= 0.0 ? x : p.elu_alpha * std::expm1(x);
    case ActivationKind::SELU:
      return x >= 0.0 ? p.selu_lambda * x
                      : p.selu_lambda * p.selu_alpha * std::expm1(x);
  }
  throw ConfigError("apply_scalar: bad discriminant");
}

// Kinks take the right limit (ReLU'(0) = 1), so backprop is deterministic.
double derivative_scalar(ActivationKind kind, double x,
                         const ActivationParams& p) {
  switch (kind) {
    case ActivationKind::ReLU:
      return x >= 0.0 ? 1.0 : 0.0;
    case ActivationKind::Sigmoid: {
      double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case ActivationKind::Tanh: {
      double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::LeakyReLU:
      return x >= 0.0 ? 1.0 : p.leaky_slope;
    case ActivationKind::ELU:
      return x >= 0.0 ? 1.0 : p.elu_alpha * std::exp(x);
    case ActivationKind::SELU:
      return x >= 0.0 ? p.selu_lambda
                      : p.selu_lambda * p.selu_alpha * std::exp(x);
  }
  throw ConfigError("derivative_scalar: bad discriminant");
}

Vector apply(ActivationKind kind, const Vector& x, const ActivationParams& p) {
  Vector y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = apply_scalar(kind, x[i], p);
  }
  return y;
}

Vector derivative(ActivationKind kind, const Vector& x,
                  const ActivationParams& p) {
  Vector y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = derivative_scalar(kind, x[i], p);
  }
  return y;
}

}  // namespace smartmixed
