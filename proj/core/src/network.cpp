#include "lanecast/network.hpp"

namespace lanecast {

std::string_view to_string(ModuleKind kind) noexcept {
  return kind == ModuleKind::classifier ? "classifier" : "regressor";
}

std::array<ConvSpec, kConvLayers> trunk_specs(const NetworkConfig& config) {
  const std::size_t z = config.dilated ? 1 : 0;
  return {{
      {config.input_channels, 24, 5, 10, 0, z},
      {24, 40, 3, 3, 0, z},
      {40, 56, 2, 3, 0, z},
      {56, 24, 1, 1, 0, 0},
  }};
}

TrunkGeometry trunk_geometry(const NetworkConfig& config) {
  TrunkGeometry g;
  g.shapes[0] = config.input_shape();
  const auto specs = trunk_specs(config);
  for (std::size_t l = 0; l < kConvLayers; ++l) g.shapes[l + 1] = specs[l].output_shape(g.shapes[l]);
  g.features = g.shapes[kConvLayers].size();
  return g;
}

std::array<ReceptiveField, kConvLayers> receptive_fields(const NetworkConfig& config) {
  std::array<ReceptiveField, kConvLayers> out{};
  const auto specs = trunk_specs(config);
  std::size_t rows = 1;
  std::size_t cols = 1;
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    // stride 1 everywhere, so each layer widens the field by its effective extent minus one
    rows += specs[l].effective_rows() - 1;
    cols += specs[l].effective_cols() - 1;
    out[l] = {config.input_channels, rows, cols};
  }
  return out;
}

DenseSpec hidden_layer_spec(const NetworkConfig& config) {
  return {trunk_geometry(config).features + config.maneuver_inputs(), config.hidden};
}

DenseSpec output_layer_spec(const NetworkConfig& config) { return {config.hidden, config.outputs()}; }

std::vector<ParameterEntry> parameter_layout(const NetworkConfig& config) {
  std::vector<ParameterEntry> layout;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::vector<std::uint32_t> dims) {
    std::size_t size = 1;
    for (auto d : dims) size *= d;
    layout.push_back({std::move(name), std::move(dims), offset, size});
    offset += size;
  };
  const auto specs = trunk_specs(config);
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    const auto& s = specs[l];
    const std::string prefix = "conv" + std::to_string(l + 1);
    add(prefix + ".weight", {static_cast<std::uint32_t>(s.out_channels), static_cast<std::uint32_t>(s.in_channels),
                             static_cast<std::uint32_t>(s.kernel_rows), static_cast<std::uint32_t>(s.kernel_cols)});
    add(prefix + ".bias", {static_cast<std::uint32_t>(s.out_channels)});
  }
  const DenseSpec hidden = hidden_layer_spec(config);
  const DenseSpec output = output_layer_spec(config);
  add("dense1.weight", {static_cast<std::uint32_t>(hidden.outputs), static_cast<std::uint32_t>(hidden.inputs)});
  add("dense1.bias", {static_cast<std::uint32_t>(hidden.outputs)});
  add("dense2.weight", {static_cast<std::uint32_t>(output.outputs), static_cast<std::uint32_t>(output.inputs)});
  add("dense2.bias", {static_cast<std::uint32_t>(output.outputs)});
  return layout;
}

std::size_t count_parameters(const NetworkConfig& config) {
  std::size_t total = 0;
  for (const auto& s : trunk_specs(config)) total += s.parameter_count();
  return total + hidden_layer_spec(config).parameter_count() + output_layer_spec(config).parameter_count();
}

}  // namespace lanecast
