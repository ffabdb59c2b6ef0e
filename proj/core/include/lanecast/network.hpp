#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lanecast/activation.hpp"
#include "lanecast/conv2d.hpp"
#include "lanecast/dense.hpp"
#include "lanecast/tensor.hpp"

namespace lanecast {

inline constexpr std::size_t kPredictionSteps = 5;
inline constexpr std::size_t kConvLayers = 4;

enum class ModuleKind : std::uint8_t { classifier = 0, regressor = 1 };

std::string_view to_string(ModuleKind kind) noexcept;

/// Architecture knobs. The defaults describe the published network; the
/// ablations flip `dilated`, `input_channels` and `maneuver_input`.
struct NetworkConfig {
  ModuleKind kind = ModuleKind::classifier;
  std::size_t input_channels = 4;
  std::size_t input_rows = 8;
  std::size_t input_cols = 30;
  bool dilated = true;
  bool maneuver_input = true;  // regressor only: append the 5 maneuver indices to the trunk features
  double slope = kDefaultLeakySlope;
  std::size_t hidden = 40;

  [[nodiscard]] Shape3 input_shape() const noexcept { return {input_channels, input_rows, input_cols}; }
  [[nodiscard]] std::size_t maneuver_inputs() const noexcept {
    return kind == ModuleKind::regressor && maneuver_input ? kPredictionSteps : 0;
  }
  [[nodiscard]] std::size_t outputs() const noexcept {
    return kind == ModuleKind::classifier ? kPredictionSteps * 3 : kPredictionSteps * 2;
  }

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// The four trunk layers: 24 filters 5x10, 40 filters 3x3, 56 filters 2x3,
/// 24 filters 1x1. The first three dilate the temporal axis by one.
std::array<ConvSpec, kConvLayers> trunk_specs(const NetworkConfig& config);

struct TrunkGeometry {
  std::array<Shape3, kConvLayers + 1> shapes;  // input, then each layer output
  std::size_t features = 0;                    // flattened trunk output length
};

TrunkGeometry trunk_geometry(const NetworkConfig& config);

struct ReceptiveField {
  std::size_t channels = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  friend bool operator==(const ReceptiveField&, const ReceptiveField&) = default;
};

/// Input region seen by one output activation after each conv layer.
std::array<ReceptiveField, kConvLayers> receptive_fields(const NetworkConfig& config);

DenseSpec hidden_layer_spec(const NetworkConfig& config);
DenseSpec output_layer_spec(const NetworkConfig& config);

std::size_t count_parameters(const NetworkConfig& config);

struct ParameterEntry {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::size_t offset = 0;
  std::size_t size = 0;
};

std::vector<ParameterEntry> parameter_layout(const NetworkConfig& config);

/// Intermediate values kept for the backward pass.
template <typename T>
struct ForwardCache {
  std::array<Tensor3<T>, kConvLayers> conv_input;
  std::array<Tensor3<T>, kConvLayers> conv_pre;
  std::vector<T> dense_input;
  std::vector<T> hidden_pre;
  std::vector<T> hidden;
  std::vector<T> output;
};

/// One of the two networks: shared trunk architecture plus a dense head.
/// Parameters live in one flat vector ordered as parameter_layout().
template <typename T>
class Network {
 public:
  explicit Network(NetworkConfig config)
      : config_(config),
        convs_(trunk_specs(config)),
        geometry_(trunk_geometry(config)),
        hidden_(hidden_layer_spec(config)),
        output_(output_layer_spec(config)),
        layout_(parameter_layout(config)),
        params_(count_parameters(config), T{0}) {}

  [[nodiscard]] const NetworkConfig& config() const noexcept { return config_; }
  [[nodiscard]] const TrunkGeometry& geometry() const noexcept { return geometry_; }
  [[nodiscard]] const std::vector<ParameterEntry>& layout() const noexcept { return layout_; }
  [[nodiscard]] std::size_t parameter_count() const noexcept { return params_.size(); }
  [[nodiscard]] std::span<T> parameters() noexcept { return params_; }
  [[nodiscard]] std::span<const T> parameters() const noexcept { return params_; }

  /// He-style uniform fan-in init for leaky layers, LeCun-uniform for the
  /// linear output layer, zero biases.
  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double slope = config_.slope;
    auto fill = [&](const ParameterEntry& e, double bound) {
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (std::size_t i = 0; i < e.size; ++i) params_[e.offset + i] = static_cast<T>(dist(rng));
    };
    for (std::size_t l = 0; l < kConvLayers; ++l) {
      const auto& spec = convs_[l];
      const double fan_in = static_cast<double>(spec.in_channels * spec.kernel_rows * spec.kernel_cols);
      fill(layout_[2 * l], std::sqrt(6.0 / ((1.0 + slope * slope) * fan_in)));
      fill(layout_[2 * l + 1], 0.0);
    }
    fill(layout_[2 * kConvLayers], std::sqrt(6.0 / ((1.0 + slope * slope) * hidden_.inputs)));
    fill(layout_[2 * kConvLayers + 1], 0.0);
    fill(layout_[2 * kConvLayers + 2], std::sqrt(3.0 / static_cast<double>(output_.inputs)));
    fill(layout_[2 * kConvLayers + 3], 0.0);
  }

  /// Trunk features followed by the dense head. `maneuvers` must hold
  /// config().maneuver_inputs() values.
  std::vector<T> forward(const Tensor3<T>& input, std::span<const T> maneuvers = {},
                         ForwardCache<T>* cache = nullptr) const {
    if (input.shape() != config_.input_shape()) {
      throw ShapeError("network: input shape " + to_string(input.shape()) + " does not match expected " +
                       to_string(config_.input_shape()));
    }
    if (maneuvers.size() != config_.maneuver_inputs()) {
      throw ShapeError("network: expected " + std::to_string(config_.maneuver_inputs()) +
                       " maneuver inputs, got " + std::to_string(maneuvers.size()));
    }
    const T slope = static_cast<T>(config_.slope);
    ForwardCache<T> local;
    ForwardCache<T>& c = cache != nullptr ? *cache : local;
    const Tensor3<T>* x = &input;
    Tensor3<T> activated;
    for (std::size_t l = 0; l < kConvLayers; ++l) {
      c.conv_input[l] = *x;
      c.conv_pre[l] = conv2d_forward<T>(*x, convs_[l], weights(2 * l), weights(2 * l + 1));
      activated = c.conv_pre[l];
      leaky_relu_inplace<T>(activated.values(), slope);
      x = &activated;
    }
    c.dense_input.assign(activated.values().begin(), activated.values().end());
    c.dense_input.insert(c.dense_input.end(), maneuvers.begin(), maneuvers.end());
    c.hidden_pre = dense_forward<T>(c.dense_input, hidden_, weights(2 * kConvLayers), weights(2 * kConvLayers + 1));
    c.hidden = c.hidden_pre;
    leaky_relu_inplace<T>(c.hidden, slope);
    c.output = dense_forward<T>(c.hidden, output_, weights(2 * kConvLayers + 2), weights(2 * kConvLayers + 3));
    return c.output;
  }

  /// Accumulates dL/dparams into grad_params given dL/doutput. Writes
  /// dL/dinput into grad_input when non-null.
  void backward(const ForwardCache<T>& cache, std::span<const T> grad_output, std::span<T> grad_params,
                Tensor3<T>* grad_input = nullptr) const {
    if (grad_output.size() != output_.outputs) throw ShapeError("network backward: output gradient length mismatch");
    if (grad_params.size() != params_.size()) throw ShapeError("network backward: parameter gradient length mismatch");
    const T slope = static_cast<T>(config_.slope);
    std::vector<T> grad_hidden(hidden_.outputs, T{0});
    dense_backward_accumulate<T>(cache.hidden, output_, weights(2 * kConvLayers + 2), grad_output, grad_hidden,
                                 grads(grad_params, 2 * kConvLayers + 2), grads(grad_params, 2 * kConvLayers + 3));
    leaky_relu_backward_inplace<T>(cache.hidden_pre, grad_hidden, slope);
    std::vector<T> grad_dense_in(hidden_.inputs, T{0});
    dense_backward_accumulate<T>(cache.dense_input, hidden_, weights(2 * kConvLayers), grad_hidden, grad_dense_in,
                                 grads(grad_params, 2 * kConvLayers), grads(grad_params, 2 * kConvLayers + 1));
    const Shape3 trunk_out = geometry_.shapes[kConvLayers];
    Tensor3<T> g(trunk_out, std::vector<T>(grad_dense_in.begin(), grad_dense_in.begin() + trunk_out.size()));
    for (std::size_t l = kConvLayers; l-- > 0;) {
      leaky_relu_backward_inplace<T>(cache.conv_pre[l].values(), g.values(), slope);
      const bool need_input = l > 0 || grad_input != nullptr;
      Tensor3<T> g_in(need_input ? cache.conv_input[l].shape() : Shape3{});
      conv2d_backward_accumulate<T>(cache.conv_input[l], convs_[l], weights(2 * l), g, need_input ? &g_in : nullptr,
                                    grads(grad_params, 2 * l), grads(grad_params, 2 * l + 1));
      if (l == 0) {
        if (grad_input != nullptr) *grad_input = std::move(g_in);
      } else {
        g = std::move(g_in);
      }
    }
  }

  /// Flattened trunk output (the 96 features in the default architecture).
  std::vector<T> features(const Tensor3<T>& input) const {
    ForwardCache<T> cache;
    std::vector<T> maneuvers(config_.maneuver_inputs(), T{0});
    forward(input, maneuvers, &cache);
    return {cache.dense_input.begin(), cache.dense_input.begin() + static_cast<std::ptrdiff_t>(geometry_.features)};
  }

  template <typename U>
  [[nodiscard]] Network<U> cast() const {
    Network<U> out(config_);
    auto dst = out.parameters();
    for (std::size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<U>(params_[i]);
    return out;
  }

 private:
  std::span<const T> weights(std::size_t entry) const {
    return std::span<const T>(params_).subspan(layout_[entry].offset, layout_[entry].size);
  }
  std::span<T> grads(std::span<T> all, std::size_t entry) const {
    return all.subspan(layout_[entry].offset, layout_[entry].size);
  }

  NetworkConfig config_;
  std::array<ConvSpec, kConvLayers> convs_;
  TrunkGeometry geometry_;
  DenseSpec hidden_;
  DenseSpec output_;
  std::vector<ParameterEntry> layout_;
  std::vector<T> params_;
};

}  // namespace lanecast
