#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lanecast/adam.hpp"
#include "lanecast/dataset.hpp"
#include "lanecast/loss.hpp"
#include "lanecast/network.hpp"

namespace lanecast {

struct TrainConfig {
  double learning_rate = 7e-5;
  std::size_t epochs = 300;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  /// The regressor is always trained on ground-truth maneuvers; the flag is
  /// kept so configs can state it explicitly.
  bool teacher_forcing = true;
  /// Keep the parameters of the epoch with the lowest validation loss.
  bool keep_best = true;
  /// Stop once the validation loss has not improved for this many epochs (0 = never).
  std::size_t patience = 0;
  /// Cosine decay of the learning rate from its initial value down to this
  /// fraction of it at the last epoch. 1 keeps it constant.
  double final_lr_scale = 1.0;
  std::size_t workers = 0;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  Network<Real> network;
  double initial_train_loss = 0.0;
  std::vector<EpochStats> curve;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

TrainResult train_classifier(std::span<const Sample> train, std::span<const Sample> val, const TrainConfig& config,
                             NetworkConfig network = {}, const EpochCallback& on_epoch = {});

/// Teacher-forced regressor training on the batch-wise RMSE of normalized offsets.
TrainResult train_regressor(std::span<const Sample> train, std::span<const Sample> val, const TrainConfig& config,
                            NetworkConfig network = {.kind = ModuleKind::regressor}, const EpochCallback& on_epoch = {});

/// Mean over samples of the summed per-step negative log-likelihood.
double classification_loss(const Network<Real>& net, std::span<const Sample> samples, std::size_t workers = 0);

/// RMSE over all sample-steps jointly, in normalized units, ground-truth maneuvers.
double regression_loss(const Network<Real>& net, std::span<const Sample> samples, std::size_t workers = 0);

/// Classification objective of one sample; accumulates dL/dparams into grad
/// (scaled by grad_scale) when grad is non-empty.
template <typename T>
T classifier_objective(const Network<T>& net, const Tensor3<T>& input, const ManeuverSequence& truth,
                       std::span<T> grad = {}, T grad_scale = T{1}) {
  ForwardCache<T> cache;
  const auto logits = net.forward(input, {}, &cache);
  std::array<int, kPredictionSteps> labels{};
  for (std::size_t i = 0; i < kPredictionSteps; ++i) labels[i] = static_cast<int>(truth[i]);
  if (grad.empty()) return softmax_nll<T>(logits, labels);
  std::vector<T> g_out(logits.size(), T{0});
  const T loss = softmax_nll<T>(logits, labels, g_out, grad_scale);
  net.backward(cache, g_out, grad);
  return loss;
}

/// Batch-wise RMSE of the regressor over the given samples (teacher forcing).
template <typename T>
T regressor_objective(const Network<T>& net, std::span<const Tensor3<T>> inputs,
                      std::span<const ManeuverSequence> maneuvers, std::span<const OffsetArray> targets,
                      std::span<T> grad = {}) {
  const std::size_t n = inputs.size();
  std::vector<ForwardCache<T>> caches(n);
  std::vector<T> pred;
  std::vector<T> truth;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<T> m;
    if (net.config().maneuver_inputs() > 0) {
      for (auto v : maneuvers[i]) m.push_back(static_cast<T>(static_cast<int>(v)));
    }
    const auto out = net.forward(inputs[i], m, &caches[i]);
    pred.insert(pred.end(), out.begin(), out.end());
    for (double v : targets[i]) truth.push_back(static_cast<T>(v));
  }
  if (grad.empty()) return rmse_loss<T>(pred, truth);
  std::vector<T> g_out(pred.size(), T{0});
  const T loss = rmse_loss<T>(pred, truth, g_out);
  const std::size_t width = net.config().outputs();
  for (std::size_t i = 0; i < n; ++i) {
    net.backward(caches[i], std::span<const T>(g_out).subspan(i * width, width), grad);
  }
  return loss;
}

}  // namespace lanecast
