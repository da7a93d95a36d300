#include "smartmixed/matrix.hpp"

#include <cmath>
#include <string>

namespace smartmixed {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) {
    throw DimensionError("matmul: inner dimensions differ (" +
                         std::to_string(a.cols) + " vs " +
                         std::to_string(b.rows) + ")");
  }
  Matrix c(a.rows, b.cols);
  // k-outer / j-inner keeps the inner loop contiguous and vectorizable
  // while each c[i][j] still accumulates in ascending k order, so the
  // result is bit-identical to the naive i-j-k loop.
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double av = arow[k];
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) {
        crow[j] += av * brow[j];
      }
    }
  }
  detail::debug_check_finite(c, "matmul");
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) {
      t.data[j * a.rows + i] = arow[j];
    }
  }
  return t;
}

std::size_t argmax(const double* v, std::size_t n) {
  if (n == 0) {
    throw EmptyInputError("argmax: empty input");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (v[i] > v[best]) {
      best = i;
    }
  }
  return best;
}

std::size_t argmax(const Vector& v) { return argmax(v.data(), v.size()); }

Matrix affine_forward(const Matrix& x, const Matrix& w, const Vector& b) {
  if (x.cols != w.cols) {
    throw DimensionError("affine_forward: input width " +
                         std::to_string(x.cols) + " != fan-in " +
                         std::to_string(w.cols));
  }
  if (b.size() != w.rows) {
    throw DimensionError("affine_forward: bias length mismatch");
  }
  Matrix u = matmul(x, transpose(w));
  for (std::size_t i = 0; i < u.rows; ++i) {
    double* urow = u.row(i);
    for (std::size_t j = 0; j < u.cols; ++j) {
      urow[j] += b[j];
    }
  }
  return u;
}

Vector column_sums(const Matrix& a) {
  Vector s(a.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) {
      s[j] += arow[j];
    }
  }
  return s;
}

bool all_finite(const Matrix& a) {
  for (double v : a.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool all_finite(const Vector& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

namespace detail {
#ifndef NDEBUG
void debug_check_finite(const Matrix& a, const char* what) {
  (void)what;
  assert(all_finite(a) && "non-finite values produced");
}
#endif
}  // namespace detail

}  // namespace smartmixed
