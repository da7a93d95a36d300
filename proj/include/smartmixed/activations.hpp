#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "smartmixed/matrix.hpp"

namespace smartmixed {

/// The candidate pool. The index order is canonical: logit columns, group
/// tables and reports all use it.
enum class ActivationKind : int {
  ReLU = 0,
  Sigmoid = 1,
  Tanh = 2,
  LeakyReLU = 3,
  ELU = 4,
  SELU = 5,
};

inline constexpr std::size_t kActivationCount = 6;

inline constexpr std::array<ActivationKind, kActivationCount> kAllActivations =
    {ActivationKind::ReLU,      ActivationKind::Sigmoid,
     ActivationKind::Tanh,      ActivationKind::LeakyReLU,
     ActivationKind::ELU,       ActivationKind::SELU};

struct ActivationParams {
  double leaky_slope = 0.01;
  double elu_alpha = 1.0;
  double selu_lambda = 1.0507009873554805;
  double selu_alpha = 1.6732632423543772;
};

/// Canonical lowercase name ("relu", "leaky_relu", ...).
const char* activation_name(ActivationKind kind);

/// Inverse of activation_name; throws ConfigError for unknown names.
ActivationKind activation_from_name(const std::string& name);

double apply_scalar(ActivationKind kind, double x, const ActivationParams& p);
double derivative_scalar(ActivationKind kind, double x,
                         const ActivationParams& p);

Vector apply(ActivationKind kind, const Vector& x, const ActivationParams& p);
Vector derivative(ActivationKind kind, const Vector& x,
                  const ActivationParams& p);

}  // namespace smartmixed
