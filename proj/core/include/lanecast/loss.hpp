#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lanecast/tensor.hpp"

namespace lanecast {

inline constexpr std::size_t kManeuverClasses = 3;
inline constexpr std::size_t kManeuverClassCount = kManeuverClasses;

/// Row-wise softmax of a steps x classes logit block.
template <typename T>
std::vector<T> softmax_rows(std::span<const T> logits, std::size_t classes = kManeuverClasses) {
  if (classes == 0 || logits.size() % classes != 0) throw ShapeError("softmax: logits not divisible into rows");
  std::vector<T> probs(logits.size());
  for (std::size_t r = 0; r < logits.size(); r += classes) {
    T peak = logits[r];
    for (std::size_t c = 1; c < classes; ++c) peak = std::max(peak, logits[r + c]);
    T total{0};
    for (std::size_t c = 0; c < classes; ++c) {
      probs[r + c] = std::exp(logits[r + c] - peak);
      total += probs[r + c];
    }
    for (std::size_t c = 0; c < classes; ++c) probs[r + c] /= total;
  }
  return probs;
}

/// Sum over prediction steps of -log p(true class). When grad is non-empty it
/// receives dL/dlogits (softmax - one_hot), scaled by grad_scale.
template <typename T>
T softmax_nll(std::span<const T> logits, std::span<const int> truth, std::span<T> grad = {},
              T grad_scale = T{1}) {
  const std::size_t steps = truth.size();
  if (logits.size() != steps * kManeuverClasses) {
    throw ShapeError("softmax_nll: expected " + std::to_string(steps * kManeuverClasses) + " logits, got " +
                     std::to_string(logits.size()));
  }
  for (int c : truth) {
    if (c < 0 || c >= static_cast<int>(kManeuverClasses)) {
      throw std::out_of_range("softmax_nll: class index " + std::to_string(c) + " outside {0, 1, 2}");
    }
  }
  T loss{0};
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t base = t * kManeuverClasses;
    T peak = logits[base];
    for (std::size_t c = 1; c < kManeuverClasses; ++c) peak = std::max(peak, logits[base + c]);
    T total{0};
    for (std::size_t c = 0; c < kManeuverClasses; ++c) total += std::exp(logits[base + c] - peak);
    const T log_total = std::log(total) + peak;
    loss += log_total - logits[base + static_cast<std::size_t>(truth[t])];
    if (!grad.empty()) {
      for (std::size_t c = 0; c < kManeuverClasses; ++c) {
        const T p = std::exp(logits[base + c] - log_total);
        const T target = static_cast<int>(c) == truth[t] ? T{1} : T{0};
        grad[base + c] += grad_scale * (p - target);
      }
    }
  }
  return loss;
}

/// sqrt(mean over steps of squared Euclidean error), where each step holds
/// `dims` coordinates. Any number of samples may be stacked: the mean then
/// runs over all sample-steps jointly. grad (if non-empty) accumulates
/// dL/dpred; at zero loss the gradient is defined as zero.
template <typename T>
T rmse_loss(std::span<const T> pred, std::span<const T> truth, std::span<T> grad = {}, std::size_t dims = 2) {
  if (pred.size() != truth.size()) throw ShapeError("rmse_loss: prediction and truth lengths differ");
  if (pred.empty()) throw std::invalid_argument("rmse_loss: empty input");
  if (dims == 0 || pred.size() % dims != 0) throw ShapeError("rmse_loss: length not divisible by step size");
  const std::size_t steps = pred.size() / dims;
  T sq{0};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const T d = pred[i] - truth[i];
    sq += d * d;
  }
  const T loss = std::sqrt(sq / static_cast<T>(steps));
  if (!grad.empty() && loss > T{0}) {
    const T scale = T{1} / (static_cast<T>(steps) * loss);
    for (std::size_t i = 0; i < pred.size(); ++i) grad[i] += scale * (pred[i] - truth[i]);
  }
  return loss;
}

}  // namespace lanecast
