#include "lanecast/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "lanecast/parallel.hpp"

namespace lanecast {

namespace {

constexpr std::size_t kChunk = 8;

enum class Objective { classification, regression };

std::array<int, kPredictionSteps> labels_of(const ManeuverSequence& m) {
  std::array<int, kPredictionSteps> out{};
  for (std::size_t i = 0; i < kPredictionSteps; ++i) out[i] = static_cast<int>(m[i]);
  return out;
}

std::vector<Real> forward_sample(const Network<Real>& net, const Sample& s, ForwardCache<Real>* cache) {
  if (net.config().maneuver_inputs() > 0) {
    const auto m = maneuver_inputs(s.maneuvers);
    return net.forward(s.input, m, cache);
  }
  return net.forward(s.input, {}, cache);
}

/// Loss over a batch plus dL/dparams, reduced in fixed chunk order.
class BatchGradient {
 public:
  BatchGradient(const Network<Real>& net, Objective objective, std::size_t max_batch, std::size_t workers)
      : net_(net), objective_(objective), workers_(workers), caches_(max_batch), outputs_(max_batch),
        chunk_grads_((max_batch + kChunk - 1) / kChunk, std::vector<Real>(net.parameter_count())) {}

  double run(std::span<const Sample* const> batch, std::vector<Real>& grad) {
    const std::size_t n = batch.size();
    parallel_for(n, [&](std::size_t i) { outputs_[i] = forward_sample(net_, *batch[i], &caches_[i]); }, workers_);

    const std::size_t width = net_.config().outputs();
    std::vector<Real> g_out(n * width, Real{0});
    double loss = 0.0;
    if (objective_ == Objective::classification) {
      const Real scale = Real{1} / static_cast<Real>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto labels = labels_of(batch[i]->maneuvers);
        loss += softmax_nll<Real>(outputs_[i], labels, std::span<Real>(g_out).subspan(i * width, width), scale);
      }
      loss /= static_cast<double>(n);
    } else {
      std::vector<Real> pred;
      std::vector<Real> truth;
      pred.reserve(n * width);
      truth.reserve(n * width);
      for (std::size_t i = 0; i < n; ++i) {
        pred.insert(pred.end(), outputs_[i].begin(), outputs_[i].end());
        for (double v : batch[i]->offsets) truth.push_back(static_cast<Real>(v));
      }
      loss = rmse_loss<Real>(pred, truth, g_out);
    }
    if (!std::isfinite(loss)) return loss;

    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](std::size_t c) {
      auto& buf = chunk_grads_[c];
      std::fill(buf.begin(), buf.end(), Real{0});
      for (std::size_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
        net_.backward(caches_[i], std::span<const Real>(g_out).subspan(i * width, width), buf);
      }
    }, workers_);
    std::fill(grad.begin(), grad.end(), Real{0});
    for (std::size_t c = 0; c < chunks; ++c) {
      const auto& buf = chunk_grads_[c];
      for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += buf[k];
    }
    return loss;
  }

 private:
  const Network<Real>& net_;
  Objective objective_;
  std::size_t workers_;
  std::vector<ForwardCache<Real>> caches_;
  std::vector<std::vector<Real>> outputs_;
  std::vector<std::vector<Real>> chunk_grads_;
};

double evaluate_loss(const Network<Real>& net, Objective objective, std::span<const Sample> samples,
                     std::size_t workers) {
  if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<Real>> outputs(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) { outputs[i] = forward_sample(net, samples[i], nullptr); }, workers);
  if (objective == Objective::classification) {
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      total += softmax_nll<Real>(outputs[i], labels_of(samples[i].maneuvers));
    }
    return total / static_cast<double>(samples.size());
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t k = 0; k < outputs[i].size(); ++k) {
      const double d = static_cast<double>(outputs[i][k]) - samples[i].offsets[k];
      sq += d * d;
    }
  }
  return std::sqrt(sq / static_cast<double>(samples.size() * kPredictionSteps));
}

TrainResult train(std::span<const Sample> train_set, std::span<const Sample> val_set, const TrainConfig& config,
                  const NetworkConfig& net_config, Objective objective, const EpochCallback& on_epoch) {
  if (train_set.empty()) throw std::invalid_argument("training set is empty");
  if (config.batch_size == 0 || config.epochs == 0 || !(config.learning_rate > 0.0)) {
    throw std::invalid_argument("train config: learning rate, epochs and batch size must be positive");
  }
  if (!(config.final_lr_scale > 0.0 && config.final_lr_scale <= 1.0)) {
    throw std::invalid_argument("train config: final_lr_scale must lie in (0, 1]");
  }
  const std::size_t workers = config.workers > 0 ? config.workers : worker_count();

  TrainResult result{Network<Real>(net_config), 0.0, {}, 0, 0.0};
  Network<Real>& net = result.network;
  net.initialize(config.seed);
  AdamState<Real> adam(net.parameter_count(), config.learning_rate);
  std::vector<Real> grad(net.parameter_count());
  const std::size_t batch_size = std::min(config.batch_size, train_set.size());
  BatchGradient batch_gradient(net, objective, batch_size, workers);

  result.initial_train_loss = evaluate_loss(net, objective, train_set, workers);
  std::vector<Real> best = std::vector<Real>(net.parameters().begin(), net.parameters().end());
  result.best_val_loss = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<const Sample*> batch;
  batch.reserve(batch_size);
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.epochs > 1) {
      const double progress = static_cast<double>(epoch - 1) / static_cast<double>(config.epochs - 1);
      const double scale = config.final_lr_scale + (1.0 - config.final_lr_scale) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
      adam.learning_rate = config.learning_rate * scale;
    }
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) batch.push_back(&train_set[order[i]]);
      const double loss = batch_gradient.run(batch, grad);
      if (!std::isfinite(loss)) {
        throw TrainingDivergence(std::string(objective == Objective::classification ? "classifier" : "regressor") +
                                 " training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch starting at " + std::to_string(start) + ", Adam step " +
                                 std::to_string(adam.step));
      }
      adam_step<Real>(net.parameters(), grad, adam);
      epoch_loss += loss * static_cast<double>(batch.size());
      seen += batch.size();
    }
    EpochStats stats{epoch, epoch_loss / static_cast<double>(seen), 0.0};
    stats.val_loss = val_set.empty() ? stats.train_loss : evaluate_loss(net, objective, val_set, workers);
    result.curve.push_back(stats);
    if (on_epoch) on_epoch(stats);
    if (stats.val_loss < result.best_val_loss) {
      result.best_val_loss = stats.val_loss;
      result.best_epoch = epoch;
      best.assign(net.parameters().begin(), net.parameters().end());
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      break;
    }
  }
  if (config.keep_best && result.best_epoch > 0) std::copy(best.begin(), best.end(), net.parameters().begin());
  return result;
}

}  // namespace

TrainResult train_classifier(std::span<const Sample> train_set, std::span<const Sample> val_set,
                             const TrainConfig& config, NetworkConfig network, const EpochCallback& on_epoch) {
  network.kind = ModuleKind::classifier;
  return train(train_set, val_set, config, network, Objective::classification, on_epoch);
}

TrainResult train_regressor(std::span<const Sample> train_set, std::span<const Sample> val_set,
                            const TrainConfig& config, NetworkConfig network, const EpochCallback& on_epoch) {
  network.kind = ModuleKind::regressor;
  return train(train_set, val_set, config, network, Objective::regression, on_epoch);
}

double classification_loss(const Network<Real>& net, std::span<const Sample> samples, std::size_t workers) {
  return evaluate_loss(net, Objective::classification, samples, workers);
}

double regression_loss(const Network<Real>& net, std::span<const Sample> samples, std::size_t workers) {
  return evaluate_loss(net, Objective::regression, samples, workers);
}

}  // namespace lanecast
