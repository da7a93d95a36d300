#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

#include "smartmixed/errors.hpp"

namespace smartmixed {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. The only numeric carrier in the
/// project; every kernel that reduces over an axis does so in ascending
/// index order so results are bit-reproducible.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // rows * cols, row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> d)
      : rows(r), cols(c), data(std::move(d)) {
    if (data.size() != rows * cols) {
      throw DimensionError("Matrix: data length does not match rows*cols");
    }
  }

  std::size_t size() const { return data.size(); }

  double& operator()(std::size_t i, std::size_t j) {
    assert(i < rows && j < cols);
    return data[i * cols + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(i < rows && j < cols);
    return data[i * cols + j];
  }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

/// C = A * B with the per-element sum taken in ascending k order.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

/// Index of the maximum element; ties resolve to the lowest index.
std::size_t argmax(const double* v, std::size_t n);
std::size_t argmax(const Vector& v);

/// u = x * w^T + b broadcast over rows (x: batch x in, w: out x in).
Matrix affine_forward(const Matrix& x, const Matrix& w, const Vector& b);

/// Column sums in ascending row order.
Vector column_sums(const Matrix& a);

bool all_finite(const Matrix& a);
bool all_finite(const Vector& v);

namespace detail {
#ifndef NDEBUG
void debug_check_finite(const Matrix& a, const char* what);
#else
inline void debug_check_finite(const Matrix&, const char*) {}
#endif
}  // namespace detail

}  // namespace smartmixed
