#include "har/nn/gemm.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

#include "har/errors.hpp"

namespace har::nn {
namespace {

// Blocked GEMM: B is packed into NR-wide column panels, A into MR-tall row
// panels, and an MR x NR register tile is accumulated per panel pair.
constexpr std::size_t kMr = 8;
constexpr std::size_t kNr = 16;
constexpr std::size_t kMc = 128;
constexpr std::size_t kKc = 256;
constexpr std::size_t kNc = 2048;

typedef double vec8 __attribute__((vector_size(64)));

inline vec8 load8(const double* p) {
  vec8 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store8(double* p, vec8 v) { std::memcpy(p, &v, sizeof v); }

// tile (MR x NR, row-major) = sum_p a[p][0..MR) (x) b[p][0..NR)
void micro_kernel(std::size_t kc, const double* __restrict a, const double* __restrict b,
                  double* __restrict tile) {
  vec8 acc[kMr][2] = {};
  for (std::size_t p = 0; p < kc; ++p) {
    const vec8 b0 = load8(b);
    const vec8 b1 = load8(b + 8);
    for (std::size_t i = 0; i < kMr; ++i) {
      const double ai = a[i];
      acc[i][0] += ai * b0;
      acc[i][1] += ai * b1;
    }
    a += kMr;
    b += kNr;
  }
  for (std::size_t i = 0; i < kMr; ++i) {
    store8(tile + i * kNr, acc[i][0]);
    store8(tile + i * kNr + 8, acc[i][1]);
  }
}

void pack_a(const ConstMatrixRef& a, std::size_t i0, std::size_t mc, std::size_t p0, std::size_t kc,
            double* dst) {
  for (std::size_t ir = 0; ir < mc; ir += kMr) {
    const std::size_t mr = std::min(kMr, mc - ir);
    for (std::size_t p = 0; p < kc; ++p) {
      std::size_t i = 0;
      for (; i < mr; ++i) dst[i] = a(i0 + ir + i, p0 + p);
      for (; i < kMr; ++i) dst[i] = 0.0;
      dst += kMr;
    }
  }
}

void pack_b(const ConstMatrixRef& b, std::size_t p0, std::size_t kc, std::size_t j0, std::size_t nc,
            double* dst) {
  for (std::size_t jr = 0; jr < nc; jr += kNr) {
    const std::size_t nr = std::min(kNr, nc - jr);
    if (b.col_stride == 1 && nr == kNr) {
      for (std::size_t p = 0; p < kc; ++p) {
        std::memcpy(dst, &b.data[static_cast<std::ptrdiff_t>(p0 + p) * b.row_stride +
                                 static_cast<std::ptrdiff_t>(j0 + jr)],
                    kNr * sizeof(double));
        dst += kNr;
      }
      continue;
    }
    for (std::size_t p = 0; p < kc; ++p) {
      std::size_t j = 0;
      for (; j < nr; ++j) dst[j] = b(p0 + p, j0 + jr + j);
      for (; j < kNr; ++j) dst[j] = 0.0;
      dst += kNr;
    }
  }
}

}  // namespace

void gemm(double alpha, ConstMatrixRef a, ConstMatrixRef b, double beta, MatrixRef c) {
  if (a.cols != b.rows || a.rows != c.rows || b.cols != c.cols)
    fail(ErrorKind::Shape, "gemm operand shapes do not conform");
  const std::size_t m = c.rows, n = c.cols, k = a.cols;

  if (beta != 1.0) {
    for (std::size_t i = 0; i < m; ++i) {
      double* row = c.data + static_cast<std::ptrdiff_t>(i) * c.row_stride;
      if (beta == 0.0)
        std::fill(row, row + n, 0.0);
      else
        for (std::size_t j = 0; j < n; ++j) row[j] *= beta;
    }
  }
  if (m == 0 || n == 0 || k == 0 || alpha == 0.0) return;

  thread_local std::vector<double> packed_a;
  thread_local std::vector<double> packed_b;
  packed_a.resize(kMc * kKc);
  packed_b.resize(kKc * kNc);
  alignas(64) double tile[kMr * kNr];

  for (std::size_t jc = 0; jc < n; jc += kNc) {
    const std::size_t nc = std::min(kNc, n - jc);
    for (std::size_t pc = 0; pc < k; pc += kKc) {
      const std::size_t kc = std::min(kKc, k - pc);
      pack_b(b, pc, kc, jc, nc, packed_b.data());
      for (std::size_t ic = 0; ic < m; ic += kMc) {
        const std::size_t mc = std::min(kMc, m - ic);
        pack_a(a, ic, mc, pc, kc, packed_a.data());
        for (std::size_t jr = 0; jr < nc; jr += kNr) {
          const std::size_t nr = std::min(kNr, nc - jr);
          const double* bp = packed_b.data() + jr * kc;
          for (std::size_t ir = 0; ir < mc; ir += kMr) {
            const std::size_t mr = std::min(kMr, mc - ir);
            micro_kernel(kc, packed_a.data() + ir * kc, bp, tile);
            for (std::size_t i = 0; i < mr; ++i) {
              double* crow = c.data + static_cast<std::ptrdiff_t>(ic + ir + i) * c.row_stride +
                             static_cast<std::ptrdiff_t>(jc + jr);
              const double* trow = tile + i * kNr;
              for (std::size_t j = 0; j < nr; ++j) crow[j] += alpha * trow[j];
            }
          }
        }
      }
    }
  }
}

}  // namespace har::nn
