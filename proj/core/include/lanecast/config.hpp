#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lanecast/ablation.hpp"
#include "lanecast/corpus.hpp"
#include "lanecast/neighborhood.hpp"
#include "lanecast/synth.hpp"
#include "lanecast/training.hpp"

namespace lanecast {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything a CLI run can be configured with. Every section of the JSON
/// file is optional; unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 0;
  TrainConfig train;
  SlotRules slots;
  FrameIndex stride = kFramesPerStep;
  bool normalize = true;
  std::array<double, 3> split{0.7, 0.1, 0.2};
  AblationVariant variant = AblationVariant::full;
  CorpusSpec corpus;
  std::optional<ScenarioSpec> scenario;

  [[nodiscard]] DatasetOptions dataset_options() const { return {slots, normalize}; }
};

RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);

ScenarioSpec parse_scenario(std::string_view json_text);

/// Canonical JSON of the effective configuration.
std::string dump_run_config(const RunConfig& config);

/// FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_fingerprint(const RunConfig& config);

}  // namespace lanecast
