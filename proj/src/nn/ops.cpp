#include "har/nn/ops.hpp"

#include <algorithm>
#include <limits>

#include "har/errors.hpp"
#include "har/nn/gemm.hpp"

namespace har::nn {
namespace {

// Adds a unit batch axis to single samples of the given spatial rank.
Shape batched(const Shape& s, std::size_t sample_rank, const char* what) {
  if (s.size() == sample_rank) {
    Shape out{1};
    out.insert(out.end(), s.begin(), s.end());
    return out;
  }
  if (s.size() == sample_rank + 1) return s;
  fail(ErrorKind::Shape, std::string(what) + ": unexpected input shape " + shape_string(s));
}

Tensor unbatch_if(Tensor t, bool single) {
  if (single) {
    Shape s(t.shape().begin() + 1, t.shape().end());
    t.reshape(std::move(s));
  }
  return t;
}

}  // namespace

std::size_t conv_output_length(std::size_t length, std::size_t kernel, std::size_t stride,
                               std::size_t padding) {
  if (stride == 0 || kernel == 0) fail(ErrorKind::Shape, "kernel and stride must be positive");
  if (length + 2 * padding < kernel)
    fail(ErrorKind::Shape, "kernel " + std::to_string(kernel) + " longer than padded extent " +
                               std::to_string(length + 2 * padding));
  return (length + 2 * padding - kernel) / stride + 1;
}

std::size_t pool_output_length(std::size_t length, std::size_t window, std::size_t stride) {
  if (stride == 0 || window == 0) fail(ErrorKind::Shape, "pool window and stride must be positive");
  if (window > length)
    fail(ErrorKind::Shape, "pool window " + std::to_string(window) + " exceeds extent " +
                               std::to_string(length));
  return (length - window) / stride + 1;
}

namespace detail {

Conv1dGeometry conv1d_geometry(const Shape& input, const Shape& kernels) {
  if (input.size() != 3 || kernels.size() != 3)
    fail(ErrorKind::Shape, "conv1d expects [B x Cin x L] input and [Cout x Cin x K] kernels");
  if (input[1] != kernels[1])
    fail(ErrorKind::Shape, "conv1d input has " + std::to_string(input[1]) +
                               " channels, kernels expect " + std::to_string(kernels[1]));
  return {input[0], input[1], input[2], kernels[0], kernels[2], 1, 0, 0};
}

Conv2dGeometry conv2d_geometry(const Shape& input, const Shape& kernels) {
  if (input.size() != 4 || kernels.size() != 4)
    fail(ErrorKind::Shape,
         "conv2d expects [B x Cin x H x W] input and [Cout x Cin x Kh x Kw] kernels");
  if (input[1] != kernels[1])
    fail(ErrorKind::Shape, "conv2d input has " + std::to_string(input[1]) +
                               " channels, kernels expect " + std::to_string(kernels[1]));
  return {input[0], input[1], input[2], input[3], kernels[0], kernels[2], kernels[3], 1, 0, 0, 0};
}

void im2col_1d(const Conv1dGeometry& g, const double* input, double* cols) {
  const std::size_t n = g.batch * g.out_length;
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    for (std::size_t k = 0; k < g.kernel; ++k) {
      double* row = cols + (c * g.kernel + k) * n;
      for (std::size_t b = 0; b < g.batch; ++b) {
        const double* src = input + (b * g.in_channels + c) * g.length;
        double* dst = row + b * g.out_length;
        for (std::size_t l = 0; l < g.out_length; ++l) {
          const auto pos = static_cast<std::ptrdiff_t>(l * g.stride + k) -
                           static_cast<std::ptrdiff_t>(g.padding);
          dst[l] = pos >= 0 && pos < static_cast<std::ptrdiff_t>(g.length) ? src[pos] : 0.0;
        }
      }
    }
  }
}

void col2im_1d(const Conv1dGeometry& g, const double* cols, double* input_grad) {
  const std::size_t n = g.batch * g.out_length;
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    for (std::size_t k = 0; k < g.kernel; ++k) {
      const double* row = cols + (c * g.kernel + k) * n;
      for (std::size_t b = 0; b < g.batch; ++b) {
        double* dst = input_grad + (b * g.in_channels + c) * g.length;
        const double* src = row + b * g.out_length;
        for (std::size_t l = 0; l < g.out_length; ++l) {
          const auto pos = static_cast<std::ptrdiff_t>(l * g.stride + k) -
                           static_cast<std::ptrdiff_t>(g.padding);
          if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(g.length)) dst[pos] += src[l];
        }
      }
    }
  }
}

void im2col_2d(const Conv2dGeometry& g, const double* input, double* cols) {
  const std::size_t spatial = g.out_height * g.out_width;
  const std::size_t n = g.batch * spatial;
  const auto pad = static_cast<std::ptrdiff_t>(g.padding);
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    for (std::size_t kh = 0; kh < g.kernel_h; ++kh) {
      for (std::size_t kw = 0; kw < g.kernel_w; ++kw) {
        double* row = cols + ((c * g.kernel_h + kh) * g.kernel_w + kw) * n;
        for (std::size_t b = 0; b < g.batch; ++b) {
          const double* src = input + (b * g.in_channels + c) * g.height * g.width;
          double* dst = row + b * spatial;
          for (std::size_t oh = 0; oh < g.out_height; ++oh) {
            const auto y = static_cast<std::ptrdiff_t>(oh * g.stride + kh) - pad;
            double* drow = dst + oh * g.out_width;
            if (y < 0 || y >= static_cast<std::ptrdiff_t>(g.height)) {
              std::fill(drow, drow + g.out_width, 0.0);
              continue;
            }
            const double* srow = src + static_cast<std::size_t>(y) * g.width;
            for (std::size_t ow = 0; ow < g.out_width; ++ow) {
              const auto x = static_cast<std::ptrdiff_t>(ow * g.stride + kw) - pad;
              drow[ow] = x >= 0 && x < static_cast<std::ptrdiff_t>(g.width) ? srow[x] : 0.0;
            }
          }
        }
      }
    }
  }
}

void col2im_2d(const Conv2dGeometry& g, const double* cols, double* input_grad) {
  const std::size_t spatial = g.out_height * g.out_width;
  const std::size_t n = g.batch * spatial;
  const auto pad = static_cast<std::ptrdiff_t>(g.padding);
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    for (std::size_t kh = 0; kh < g.kernel_h; ++kh) {
      for (std::size_t kw = 0; kw < g.kernel_w; ++kw) {
        const double* row = cols + ((c * g.kernel_h + kh) * g.kernel_w + kw) * n;
        for (std::size_t b = 0; b < g.batch; ++b) {
          double* dst = input_grad + (b * g.in_channels + c) * g.height * g.width;
          const double* src = row + b * spatial;
          for (std::size_t oh = 0; oh < g.out_height; ++oh) {
            const auto y = static_cast<std::ptrdiff_t>(oh * g.stride + kh) - pad;
            if (y < 0 || y >= static_cast<std::ptrdiff_t>(g.height)) continue;
            double* drow = dst + static_cast<std::size_t>(y) * g.width;
            const double* srow = src + oh * g.out_width;
            for (std::size_t ow = 0; ow < g.out_width; ++ow) {
              const auto x = static_cast<std::ptrdiff_t>(ow * g.stride + kw) - pad;
              if (x >= 0 && x < static_cast<std::ptrdiff_t>(g.width)) drow[x] += srow[ow];
            }
          }
        }
      }
    }
  }
}

void conv_gemm_forward(std::size_t batch, std::size_t out_channels, std::size_t spatial,
                       std::size_t col_rows, const double* kernels, const double* bias,
                       const double* cols, double* out) {
  const std::size_t n = batch * spatial;
  std::vector<double> result(out_channels * n);
  gemm(1.0, const_matrix(kernels, out_channels, col_rows), const_matrix(cols, col_rows, n), 0.0,
       matrix(result.data(), out_channels, n));
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t co = 0; co < out_channels; ++co) {
      const double* src = result.data() + co * n + b * spatial;
      double* dst = out + (b * out_channels + co) * spatial;
      for (std::size_t s = 0; s < spatial; ++s) dst[s] = src[s] + bias[co];
    }
  }
}

}  // namespace detail

Tensor conv1d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias,
                      std::size_t stride, std::size_t padding) {
  const bool single = input.rank() == 2;
  const Shape in_shape = batched(input.shape(), 2, "conv1d");
  auto g = detail::conv1d_geometry(in_shape, kernels.shape());
  if (bias.size() != g.out_channels) fail(ErrorKind::Shape, "conv1d bias length mismatch");
  g.stride = stride;
  g.padding = padding;
  g.out_length = conv_output_length(g.length, g.kernel, stride, padding);

  std::vector<double> cols(g.in_channels * g.kernel * g.batch * g.out_length);
  detail::im2col_1d(g, input.data(), cols.data());
  Tensor out({g.batch, g.out_channels, g.out_length});
  detail::conv_gemm_forward(g.batch, g.out_channels, g.out_length, g.in_channels * g.kernel,
                            kernels.data(), bias.data(), cols.data(), out.data());
  return unbatch_if(std::move(out), single);
}

Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias,
                      std::size_t stride, std::size_t padding) {
  const bool single = input.rank() == 3;
  const Shape in_shape = batched(input.shape(), 3, "conv2d");
  auto g = detail::conv2d_geometry(in_shape, kernels.shape());
  if (bias.size() != g.out_channels) fail(ErrorKind::Shape, "conv2d bias length mismatch");
  g.stride = stride;
  g.padding = padding;
  g.out_height = conv_output_length(g.height, g.kernel_h, stride, padding);
  g.out_width = conv_output_length(g.width, g.kernel_w, stride, padding);

  const std::size_t spatial = g.out_height * g.out_width;
  const std::size_t col_rows = g.in_channels * g.kernel_h * g.kernel_w;
  std::vector<double> cols(col_rows * g.batch * spatial);
  detail::im2col_2d(g, input.data(), cols.data());
  Tensor out({g.batch, g.out_channels, g.out_height, g.out_width});
  detail::conv_gemm_forward(g.batch, g.out_channels, spatial, col_rows, kernels.data(),
                            bias.data(), cols.data(), out.data());
  return unbatch_if(std::move(out), single);
}

PoolResult maxpool1d_forward(const Tensor& input, std::size_t window, std::size_t stride) {
  const bool single = input.rank() == 2;
  const Shape s = batched(input.shape(), 2, "maxpool1d");
  const std::size_t planes = s[0] * s[1], length = s[2];
  const std::size_t out_len = pool_output_length(length, window, stride);

  PoolResult r{Tensor({s[0], s[1], out_len}), std::vector<std::size_t>(planes * out_len)};
  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = input.data() + p * length;
    for (std::size_t o = 0; o < out_len; ++o) {
      std::size_t best = o * stride;
      for (std::size_t k = 1; k < window; ++k)
        if (src[o * stride + k] > src[best]) best = o * stride + k;
      r.output[p * out_len + o] = src[best];
      r.argmax[p * out_len + o] = p * length + best;
    }
  }
  r.output = unbatch_if(std::move(r.output), single);
  return r;
}

PoolResult maxpool2d_forward(const Tensor& input, std::size_t window, std::size_t stride) {
  const bool single = input.rank() == 3;
  const Shape s = batched(input.shape(), 3, "maxpool2d");
  const std::size_t planes = s[0] * s[1], h = s[2], w = s[3];
  const std::size_t oh = pool_output_length(h, window, stride);
  const std::size_t ow = pool_output_length(w, window, stride);

  PoolResult r{Tensor({s[0], s[1], oh, ow}), std::vector<std::size_t>(planes * oh * ow)};
  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = input.data() + p * h * w;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        std::size_t best = (y * stride) * w + x * stride;
        for (std::size_t ky = 0; ky < window; ++ky) {
          for (std::size_t kx = 0; kx < window; ++kx) {
            const std::size_t idx = (y * stride + ky) * w + x * stride + kx;
            if (src[idx] > src[best]) best = idx;
          }
        }
        const std::size_t o = (p * oh + y) * ow + x;
        r.output[o] = src[best];
        r.argmax[o] = p * h * w + best;
      }
    }
  }
  r.output = unbatch_if(std::move(r.output), single);
  return r;
}

Tensor maxpool_backward(const Tensor& grad_output, const std::vector<std::size_t>& argmax,
                        const Shape& input_shape) {
  if (grad_output.size() != argmax.size())
    fail(ErrorKind::Shape, "pool gradient does not match stored argmax");
  Tensor grad(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) grad[argmax[i]] += grad_output[i];
  return grad;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  const bool single = input.rank() == 1;
  const Shape s = batched(input.shape(), 1, "dense");
  if (weights.rank() != 2 || weights.dim(1) != s[1])
    fail(ErrorKind::Shape, "dense input " + shape_string(input.shape()) +
                               " does not match weights " + shape_string(weights.shape()));
  const std::size_t batch = s[0], din = s[1], dout = weights.dim(0);
  if (bias.size() != dout) fail(ErrorKind::Shape, "dense bias length mismatch");

  Tensor out({batch, dout});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < dout; ++o) out[b * dout + o] = bias[o];
  gemm(1.0, const_matrix(input.data(), batch, din), const_matrix(weights.data(), dout, din).t(),
       1.0, matrix(out.data(), batch, dout));
  return unbatch_if(std::move(out), single);
}

}  // namespace har::nn
