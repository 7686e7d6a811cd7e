// Slow reference implementations the library is checked against. Nothing
// here calls into the code under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

// ---------------------------------------------------------------------------
// Layers as nested loops on flat row-major arrays.

// in [B][Cin][L], w [Cout][Cin][K], b [Cout] -> [B][Cout][Lout]
inline std::vector<double> conv1d(const std::vector<double>& in, const std::vector<double>& w,
                                  const std::vector<double>& b, std::size_t B, std::size_t Cin,
                                  std::size_t L, std::size_t Cout, std::size_t K,
                                  std::size_t stride, std::size_t pad) {
  const std::size_t Lout = (L + 2 * pad - K) / stride + 1;
  std::vector<double> out(B * Cout * Lout);
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t o = 0; o < Cout; ++o)
      for (std::size_t x = 0; x < Lout; ++x) {
        double acc = b[o];
        for (std::size_t c = 0; c < Cin; ++c)
          for (std::size_t k = 0; k < K; ++k) {
            const long pos = static_cast<long>(x * stride + k) - static_cast<long>(pad);
            if (pos < 0 || pos >= static_cast<long>(L)) continue;
            acc += w[(o * Cin + c) * K + k] * in[(n * Cin + c) * L + static_cast<std::size_t>(pos)];
          }
        out[(n * Cout + o) * Lout + x] = acc;
      }
  return out;
}

// in [B][Cin][H][W], w [Cout][Cin][K][K] -> [B][Cout][Hout][Wout]
inline std::vector<double> conv2d(const std::vector<double>& in, const std::vector<double>& w,
                                  const std::vector<double>& b, std::size_t B, std::size_t Cin,
                                  std::size_t H, std::size_t W, std::size_t Cout, std::size_t K,
                                  std::size_t stride, std::size_t pad) {
  const std::size_t Ho = (H + 2 * pad - K) / stride + 1;
  const std::size_t Wo = (W + 2 * pad - K) / stride + 1;
  std::vector<double> out(B * Cout * Ho * Wo);
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t o = 0; o < Cout; ++o)
      for (std::size_t y = 0; y < Ho; ++y)
        for (std::size_t x = 0; x < Wo; ++x) {
          double acc = b[o];
          for (std::size_t c = 0; c < Cin; ++c)
            for (std::size_t i = 0; i < K; ++i)
              for (std::size_t j = 0; j < K; ++j) {
                const long r = static_cast<long>(y * stride + i) - static_cast<long>(pad);
                const long s = static_cast<long>(x * stride + j) - static_cast<long>(pad);
                if (r < 0 || s < 0 || r >= static_cast<long>(H) || s >= static_cast<long>(W)) continue;
                acc += w[((o * Cin + c) * K + i) * K + j] *
                       in[((n * Cin + c) * H + static_cast<std::size_t>(r)) * W + static_cast<std::size_t>(s)];
              }
          out[((n * Cout + o) * Ho + y) * Wo + x] = acc;
        }
  return out;
}

// in [B][C][L] -> [B][C][Lout]
inline std::vector<double> maxpool1d(const std::vector<double>& in, std::size_t B, std::size_t C,
                                     std::size_t L, std::size_t win, std::size_t stride) {
  const std::size_t Lo = (L - win) / stride + 1;
  std::vector<double> out(B * C * Lo);
  for (std::size_t n = 0; n < B * C; ++n)
    for (std::size_t x = 0; x < Lo; ++x) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < win; ++k) m = std::max(m, in[n * L + x * stride + k]);
      out[n * Lo + x] = m;
    }
  return out;
}

// in [B][C][H][W] -> [B][C][Ho][Wo]
inline std::vector<double> maxpool2d(const std::vector<double>& in, std::size_t B, std::size_t C,
                                     std::size_t H, std::size_t W, std::size_t win,
                                     std::size_t stride) {
  const std::size_t Ho = (H - win) / stride + 1;
  const std::size_t Wo = (W - win) / stride + 1;
  std::vector<double> out(B * C * Ho * Wo);
  for (std::size_t n = 0; n < B * C; ++n)
    for (std::size_t y = 0; y < Ho; ++y)
      for (std::size_t x = 0; x < Wo; ++x) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < win; ++i)
          for (std::size_t j = 0; j < win; ++j)
            m = std::max(m, in[(n * H + y * stride + i) * W + x * stride + j]);
        out[(n * Ho + y) * Wo + x] = m;
      }
  return out;
}

// in [B][Din], w [Dout][Din] -> [B][Dout]
inline std::vector<double> dense(const std::vector<double>& in, const std::vector<double>& w,
                                 const std::vector<double>& b, std::size_t B, std::size_t Din,
                                 std::size_t Dout) {
  std::vector<double> out(B * Dout);
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t o = 0; o < Dout; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < Din; ++i) acc += w[o * Din + i] * in[n * Din + i];
      out[n * Dout + o] = acc;
    }
  return out;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// ---------------------------------------------------------------------------
// Central finite differences.

struct FdResult {
  double derivative = 0.0;
  bool smooth = true;  // false when step h and h/2 disagree (a kink nearby)
};

/// d f / d x at the current value of `x`, restoring it afterwards.
inline FdResult central_difference(const std::function<double()>& f, double& x, double h = 1e-3) {
  const double saved = x;
  auto diff = [&](double step) {
    x = saved + step;
    const double up = f();
    x = saved - step;
    const double down = f();
    x = saved;
    return (up - down) / (2.0 * step);
  };
  FdResult r;
  r.derivative = diff(h);
  const double half = diff(h / 2.0);
  // Richardson: on smooth functions the two estimates differ by O(h^2).
  const double scale = std::max({std::abs(r.derivative), std::abs(half), 1e-6});
  r.smooth = std::abs(r.derivative - half) <= 1e-5 * scale + 1e-9;
  return r;
}

/// |a - b| / max(|a|, |b|); zero when both are below `floor`.
inline double relative_error(double a, double b, double floor = 1e-10) {
  const double m = std::max(std::abs(a), std::abs(b));
  if (m < floor) return 0.0;
  return std::abs(a - b) / m;
}

// ---------------------------------------------------------------------------
// F1 through 2tp / (2tp + fp + fn), an algebraically different route than
// precision and recall.

inline Rational f1(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  const std::uint64_t den = 2 * tp + fp + fn;
  if (den == 0) return Rational(0);
  return Rational(2 * tp, den);
}

/// cm[t][p], K x K; classes with no row and no column mass are skipped.
inline Rational macro_f1(const std::vector<std::vector<std::uint64_t>>& cm) {
  const std::size_t K = cm.size();
  Rational sum = 0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < K; ++k) {
    std::uint64_t row = 0, col = 0;
    for (std::size_t j = 0; j < K; ++j) {
      row += cm[k][j];
      col += cm[j][k];
    }
    if (row == 0 && col == 0) continue;
    const std::uint64_t tp = cm[k][k];
    sum += f1(tp, col - tp, row - tp);
    ++used;
  }
  return used == 0 ? Rational(0) : sum / Rational(used);
}

// ---------------------------------------------------------------------------

/// Number of windows by walking the start index.
inline std::size_t enumerate_windows(std::size_t length, std::size_t size, std::size_t step) {
  std::size_t n = 0;
  for (std::size_t start = 0; start + size <= length; start += step) ++n;
  return n;
}

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  std::size_t size(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  }
  double real(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  std::vector<double> reals(std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = real(lo, hi);
    return v;
  }
};

}  // namespace oracle
