#pragma once

#include <cstddef>
#include <vector>

#include "har/nn/tensor.hpp"

namespace har::nn {

// Convolutions are cross-correlations (kernels are not flipped). Every
// function accepts a single sample or a batch with a leading batch axis.

/// floor((length + 2 * padding - kernel) / stride) + 1; throws on invalid geometry.
std::size_t conv_output_length(std::size_t length, std::size_t kernel, std::size_t stride,
                               std::size_t padding);
/// floor((length - window) / stride) + 1; throws on invalid geometry.
std::size_t pool_output_length(std::size_t length, std::size_t window, std::size_t stride);

/// input [Cin x L] or [B x Cin x L], kernels [Cout x Cin x K], bias [Cout].
Tensor conv1d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias,
                      std::size_t stride = 1, std::size_t padding = 0);

/// input [Cin x H x W] or [B x Cin x H x W], kernels [Cout x Cin x Kh x Kw], bias [Cout].
Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias,
                      std::size_t stride = 1, std::size_t padding = 0);

struct PoolResult {
  Tensor output;
  /// Flat input offset of the selected element for every output element.
  std::vector<std::size_t> argmax;
};

/// input [C x L] or [B x C x L]. Ties resolve to the first maximal element.
PoolResult maxpool1d_forward(const Tensor& input, std::size_t window, std::size_t stride);
/// input [C x H x W] or [B x C x H x W]; square window.
PoolResult maxpool2d_forward(const Tensor& input, std::size_t window, std::size_t stride);
/// Scatters grad_output onto the argmax positions of an input-shaped tensor.
Tensor maxpool_backward(const Tensor& grad_output, const std::vector<std::size_t>& argmax,
                        const Shape& input_shape);

/// input [Din] or [B x Din], weights [Dout x Din], bias [Dout].
Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);

namespace detail {

struct Conv1dGeometry {
  std::size_t batch, in_channels, length, out_channels, kernel, stride, padding, out_length;
};
struct Conv2dGeometry {
  std::size_t batch, in_channels, height, width, out_channels, kernel_h, kernel_w, stride,
      padding, out_height, out_width;
};

Conv1dGeometry conv1d_geometry(const Shape& input, const Shape& kernels);
Conv2dGeometry conv2d_geometry(const Shape& input, const Shape& kernels);

/// cols [(Cin*K) x (B*L')]
void im2col_1d(const Conv1dGeometry& g, const double* input, double* cols);
void col2im_1d(const Conv1dGeometry& g, const double* cols, double* input_grad);
/// cols [(Cin*Kh*Kw) x (B*H'*W')]
void im2col_2d(const Conv2dGeometry& g, const double* input, double* cols);
void col2im_2d(const Conv2dGeometry& g, const double* cols, double* input_grad);

/// out [B x Cout x spatial] = kernels [Cout x rows(cols)] * cols + bias.
void conv_gemm_forward(std::size_t batch, std::size_t out_channels, std::size_t spatial,
                       std::size_t col_rows, const double* kernels, const double* bias,
                       const double* cols, double* out);

}  // namespace detail
}  // namespace har::nn
