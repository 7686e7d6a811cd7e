#pragma once

#include <cstddef>

namespace har::nn {

/// Read-only strided matrix view. Transposition swaps the strides.
struct ConstMatrixRef {
  const double* data;
  std::size_t rows;
  std::size_t cols;
  std::ptrdiff_t row_stride;
  std::ptrdiff_t col_stride = 1;

  double operator()(std::size_t r, std::size_t c) const {
    return data[static_cast<std::ptrdiff_t>(r) * row_stride + static_cast<std::ptrdiff_t>(c) * col_stride];
  }
  ConstMatrixRef t() const { return {data, cols, rows, col_stride, row_stride}; }
};

/// Writable row-major matrix view with unit column stride.
struct MatrixRef {
  double* data;
  std::size_t rows;
  std::size_t cols;
  std::ptrdiff_t row_stride;

  double& operator()(std::size_t r, std::size_t c) const {
    return data[static_cast<std::ptrdiff_t>(r) * row_stride + static_cast<std::ptrdiff_t>(c)];
  }
};

inline ConstMatrixRef const_matrix(const double* data, std::size_t rows, std::size_t cols) {
  return {data, rows, cols, static_cast<std::ptrdiff_t>(cols), 1};
}
inline MatrixRef matrix(double* data, std::size_t rows, std::size_t cols) {
  return {data, rows, cols, static_cast<std::ptrdiff_t>(cols)};
}

/// C = alpha * A * B + beta * C. With beta == 0 the prior contents of C are
/// ignored. Single-threaded; the summation order depends only on the shapes,
/// so results are reproducible bit for bit.
void gemm(double alpha, ConstMatrixRef a, ConstMatrixRef b, double beta, MatrixRef c);

}  // namespace har::nn
