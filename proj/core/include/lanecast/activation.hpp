#pragma once

#include <span>
#include <stdexcept>

namespace lanecast {

inline constexpr double kDefaultLeakySlope = 0.01;

inline void check_leaky_slope(double slope) {
  if (!(slope > 0.0 && slope < 1.0)) throw std::invalid_argument("leaky_relu: slope must lie in (0, 1)");
}

template <typename T>
constexpr T leaky_relu(T x, T slope) noexcept {
  return x >= T{0} ? x : slope * x;
}

/// In-place elementwise leaky ReLU.
template <typename T>
void leaky_relu_inplace(std::span<T> values, T slope) noexcept {
  for (T& v : values) v = leaky_relu(v, slope);
}

/// Scales grad by the activation derivative evaluated at the pre-activation.
/// The derivative at exactly zero is taken as 1.
template <typename T>
void leaky_relu_backward_inplace(std::span<const T> pre_activation, std::span<T> grad, T slope) noexcept {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (pre_activation[i] < T{0}) grad[i] *= slope;
  }
}

}  // namespace lanecast
