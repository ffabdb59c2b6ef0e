#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lanecast/tensor.hpp"

namespace lanecast {

struct DenseSpec {
  std::size_t inputs = 1;
  std::size_t outputs = 1;

  [[nodiscard]] std::size_t weight_count() const noexcept { return inputs * outputs; }
  [[nodiscard]] std::size_t bias_count() const noexcept { return outputs; }
  [[nodiscard]] std::size_t parameter_count() const noexcept { return weight_count() + bias_count(); }

  friend bool operator==(const DenseSpec&, const DenseSpec&) = default;
};

namespace detail {
inline void check_dense(const DenseSpec& spec, std::size_t input, std::size_t weights, std::size_t bias) {
  if (input != spec.inputs) {
    throw ShapeError("dense: input length " + std::to_string(input) + " does not match layer input " +
                     std::to_string(spec.inputs));
  }
  if (weights != spec.weight_count() || bias != spec.bias_count()) {
    throw ShapeError("dense: parameter lengths do not match " + std::to_string(spec.inputs) + "->" +
                     std::to_string(spec.outputs));
  }
}
}  // namespace detail

/// y = W x + b with W stored [out][in].
template <typename T>
std::vector<T> dense_forward(std::span<const T> input, const DenseSpec& spec, std::span<const T> weights,
                             std::span<const T> bias) {
  detail::check_dense(spec, input.size(), weights.size(), bias.size());
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  // Eigen-owned copies: vectorized products peel by pointer alignment, so
  // products on caller buffers would round differently from run to run.
  const Mat w = Eigen::Map<const Mat>(weights.data(), spec.outputs, spec.inputs);
  const Vec x = Eigen::Map<const Vec>(input.data(), spec.inputs);
  const Vec y = w * x;
  std::vector<T> out(spec.outputs);
  for (std::size_t i = 0; i < spec.outputs; ++i) out[i] = y[i] + bias[i];
  return out;
}

/// Accumulates dL/dW, dL/db, and (when non-empty) dL/dx.
template <typename T>
void dense_backward_accumulate(std::span<const T> input, const DenseSpec& spec, std::span<const T> weights,
                               std::span<const T> upstream, std::span<T> grad_input,
                               std::span<T> grad_weights, std::span<T> grad_bias) {
  detail::check_dense(spec, input.size(), weights.size(), spec.bias_count());
  detail::check_dense(spec, input.size(), grad_weights.size(), grad_bias.size());
  if (upstream.size() != spec.outputs) {
    throw ShapeError("dense_backward: upstream length " + std::to_string(upstream.size()) +
                     " does not match layer output " + std::to_string(spec.outputs));
  }
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  const Vec x = Eigen::Map<const Vec>(input.data(), spec.inputs);
  const Vec g = Eigen::Map<const Vec>(upstream.data(), spec.outputs);
  const Mat outer = g * x.transpose();
  Eigen::Map<Mat>(grad_weights.data(), spec.outputs, spec.inputs) += outer;
  Eigen::Map<Vec>(grad_bias.data(), spec.outputs) += g;
  if (!grad_input.empty()) {
    if (grad_input.size() != spec.inputs) throw ShapeError("dense_backward: input gradient buffer has wrong length");
    const Mat w = Eigen::Map<const Mat>(weights.data(), spec.outputs, spec.inputs);
    const Vec gx = w.transpose() * g;
    Eigen::Map<Vec>(grad_input.data(), spec.inputs) += gx;
  }
}

template <typename T>
struct DenseGrads {
  std::vector<T> input;
  std::vector<T> weights;
  std::vector<T> bias;
};

template <typename T>
DenseGrads<T> dense_backward(std::span<const T> input, const DenseSpec& spec, std::span<const T> weights,
                             std::span<const T> upstream) {
  DenseGrads<T> grads{std::vector<T>(spec.inputs, T{0}), std::vector<T>(spec.weight_count(), T{0}),
                      std::vector<T>(spec.bias_count(), T{0})};
  dense_backward_accumulate<T>(input, spec, weights, upstream, grads.input, grads.weights, grads.bias);
  return grads;
}

}  // namespace lanecast
