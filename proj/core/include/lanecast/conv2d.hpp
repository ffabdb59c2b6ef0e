#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lanecast/tensor.hpp"

namespace lanecast {

/// 2D convolution geometry. Stride is 1 and there is no padding. Dilation
/// counts the zeros inserted between adjacent kernel taps, so a kernel of
/// extent k covers k + (k - 1) * dilation input cells.
struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_rows = 1;
  std::size_t kernel_cols = 1;
  std::size_t dilation_rows = 0;
  std::size_t dilation_cols = 0;

  [[nodiscard]] std::size_t effective_rows() const noexcept {
    return kernel_rows + (kernel_rows - 1) * dilation_rows;
  }
  [[nodiscard]] std::size_t effective_cols() const noexcept {
    return kernel_cols + (kernel_cols - 1) * dilation_cols;
  }
  [[nodiscard]] std::size_t weight_count() const noexcept {
    return out_channels * in_channels * kernel_rows * kernel_cols;
  }
  [[nodiscard]] std::size_t bias_count() const noexcept { return out_channels; }
  [[nodiscard]] std::size_t parameter_count() const noexcept { return weight_count() + bias_count(); }

  /// Output shape for an input shape; throws ShapeError when the kernel does
  /// not fit or the channel count disagrees.
  [[nodiscard]] Shape3 output_shape(const Shape3& in) const {
    if (in.channels != in_channels) {
      throw ShapeError("conv2d: input has " + std::to_string(in.channels) + " channels, layer expects " +
                       std::to_string(in_channels));
    }
    if (in.rows < effective_rows() || in.cols < effective_cols()) {
      throw ShapeError("conv2d: effective kernel " + std::to_string(effective_rows()) + "x" +
                       std::to_string(effective_cols()) + " does not fit input " + to_string(in));
    }
    return {out_channels, in.rows - effective_rows() + 1, in.cols - effective_cols() + 1};
  }

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

template <typename T>
struct ConvGrads {
  Tensor3<T> input;
  std::vector<T> weights;
  std::vector<T> bias;
};

namespace detail {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

inline void check_param_lengths(const ConvSpec& spec, std::size_t weights, std::size_t bias) {
  if (weights != spec.weight_count() || bias != spec.bias_count()) {
    throw ShapeError("conv2d: expected " + std::to_string(spec.weight_count()) + " weights and " +
                     std::to_string(spec.bias_count()) + " biases, got " + std::to_string(weights) +
                     " and " + std::to_string(bias));
  }
}

/// Unrolls dilated patches into a (in_channels * kr * kc) x (out_rows * out_cols)
/// matrix so the convolution becomes one matrix product.
template <typename T>
RowMatrix<T> im2col(const Tensor3<T>& in, const ConvSpec& spec, const Shape3& out) {
  const std::size_t k = spec.in_channels * spec.kernel_rows * spec.kernel_cols;
  RowMatrix<T> col(k, out.rows * out.cols);
  std::size_t row = 0;
  for (std::size_t c = 0; c < spec.in_channels; ++c) {
    for (std::size_t kr = 0; kr < spec.kernel_rows; ++kr) {
      const std::size_t r_off = kr * (spec.dilation_rows + 1);
      for (std::size_t kc = 0; kc < spec.kernel_cols; ++kc, ++row) {
        const std::size_t c_off = kc * (spec.dilation_cols + 1);
        T* dst = col.row(row).data();
        for (std::size_t r = 0; r < out.rows; ++r) {
          const T* src = &in(c, r + r_off, c_off);
          for (std::size_t q = 0; q < out.cols; ++q) dst[r * out.cols + q] = src[q];
        }
      }
    }
  }
  return col;
}

template <typename T>
void col2im_add(const RowMatrix<T>& col, const ConvSpec& spec, const Shape3& out, Tensor3<T>& grad_in) {
  std::size_t row = 0;
  for (std::size_t c = 0; c < spec.in_channels; ++c) {
    for (std::size_t kr = 0; kr < spec.kernel_rows; ++kr) {
      const std::size_t r_off = kr * (spec.dilation_rows + 1);
      for (std::size_t kc = 0; kc < spec.kernel_cols; ++kc, ++row) {
        const std::size_t c_off = kc * (spec.dilation_cols + 1);
        const T* src = col.row(row).data();
        for (std::size_t r = 0; r < out.rows; ++r) {
          T* dst = &grad_in(c, r + r_off, c_off);
          for (std::size_t q = 0; q < out.cols; ++q) dst[q] += src[r * out.cols + q];
        }
      }
    }
  }
}

}  // namespace detail

/// Dilated cross-correlation over all input channels plus bias. Weights are
/// laid out [out][in][kernel_row][kernel_col].
template <typename T>
Tensor3<T> conv2d_forward(const Tensor3<T>& input, const ConvSpec& spec, std::span<const T> weights,
                          std::span<const T> bias) {
  detail::check_param_lengths(spec, weights.size(), bias.size());
  const Shape3 out_shape = spec.output_shape(input.shape());
  const auto col = detail::im2col(input, spec, out_shape);
  Tensor3<T> out(out_shape);
  const std::size_t k = col.rows();
  const std::size_t n = col.cols();
  // owned operands keep the product's rounding independent of where the
  // caller's buffers happen to be aligned
  const detail::RowMatrix<T> w = detail::ConstMatrixMap<T>(weights.data(), spec.out_channels, k);
  detail::RowMatrix<T> y = w * col;
  for (std::size_t o = 0; o < spec.out_channels; ++o) y.row(o).array() += bias[o];
  detail::MatrixMap<T>(out.data(), spec.out_channels, n) = y;
  return out;
}

/// Accumulates parameter gradients into grad_weights/grad_bias and, when
/// grad_input is non-null, input gradients into *grad_input.
template <typename T>
void conv2d_backward_accumulate(const Tensor3<T>& input, const ConvSpec& spec, std::span<const T> weights,
                                const Tensor3<T>& upstream, Tensor3<T>* grad_input,
                                std::span<T> grad_weights, std::span<T> grad_bias) {
  detail::check_param_lengths(spec, weights.size(), spec.bias_count());
  detail::check_param_lengths(spec, grad_weights.size(), grad_bias.size());
  const Shape3 out_shape = spec.output_shape(input.shape());
  if (upstream.shape() != out_shape) {
    throw ShapeError("conv2d_backward: upstream gradient " + to_string(upstream.shape()) +
                     " does not match forward output " + to_string(out_shape));
  }
  if (grad_input != nullptr && grad_input->shape() != input.shape()) {
    throw ShapeError("conv2d_backward: input gradient buffer has wrong shape");
  }
  const auto col = detail::im2col(input, spec, out_shape);
  const std::size_t k = col.rows();
  const std::size_t n = col.cols();
  const detail::RowMatrix<T> g = detail::ConstMatrixMap<T>(upstream.data(), spec.out_channels, n);
  const detail::RowMatrix<T> gw = g * col.transpose();
  detail::MatrixMap<T>(grad_weights.data(), spec.out_channels, k) += gw;
  for (std::size_t o = 0; o < spec.out_channels; ++o) grad_bias[o] += g.row(o).sum();
  if (grad_input != nullptr) {
    const detail::RowMatrix<T> w = detail::ConstMatrixMap<T>(weights.data(), spec.out_channels, k);
    const detail::RowMatrix<T> gcol = w.transpose() * g;
    detail::col2im_add(gcol, spec, out_shape, *grad_input);
  }
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor3<T>& input, const ConvSpec& spec, std::span<const T> weights,
                             const Tensor3<T>& upstream) {
  ConvGrads<T> grads{Tensor3<T>(input.shape()), std::vector<T>(spec.weight_count(), T{0}),
                     std::vector<T>(spec.bias_count(), T{0})};
  conv2d_backward_accumulate<T>(input, spec, weights, upstream, &grads.input, grads.weights, grads.bias);
  return grads;
}

}  // namespace lanecast
