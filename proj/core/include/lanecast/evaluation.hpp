#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lanecast/dataset.hpp"
#include "lanecast/loss.hpp"
#include "lanecast/pipeline.hpp"

namespace lanecast {

using ConfusionMatrix = std::array<std::array<std::size_t, kManeuverClassCount>, kManeuverClassCount>;  // [truth][predicted]

struct EvalReport {
  std::array<double, kPredictionSteps> rmse{};      // meters, horizons 1..5 s
  std::array<double, kPredictionSteps> accuracy{};  // per-step maneuver accuracy
  std::array<ConfusionMatrix, kPredictionSteps> confusion{};
  std::size_t sample_count = 0;
  std::string fingerprint;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// What the pipeline produced for one sample.
struct SamplePrediction {
  ManeuverSequence maneuvers{};
  std::array<std::array<double, 2>, kPredictionSteps> positions{};  // absolute, meters
};

/// Ground-truth absolute positions at 1..5 s.
std::array<std::array<double, 2>, kPredictionSteps> true_positions(const Sample& sample);

/// Per-step RMSE of the Euclidean position error, per-step accuracy and
/// confusion counts. Summation runs in sample order.
EvalReport score(std::span<const SamplePrediction> predictions, std::span<const Sample> truth,
                 std::string fingerprint = {});

/// Full two-stage inference on every sample, parallel per sample.
std::vector<SamplePrediction> predict_samples(const Predictor& predictor, std::span<const Sample> samples,
                                              std::size_t workers = 0);

EvalReport evaluate(const Predictor& predictor, std::span<const Sample> samples, std::string fingerprint = {},
                    std::size_t workers = 0);

enum class ReportFormat { delimited, structured };

ReportFormat parse_report_format(std::string_view name);

/// Delimited: header `horizon_s,rmse_m,acc,n` plus one row per horizon.
/// Structured: JSON carrying every field, readable by read_report.
std::string format_report(const EvalReport& report, ReportFormat format);
void export_report(const EvalReport& report, const std::filesystem::path& path, ReportFormat format);
EvalReport parse_report(std::string_view json_text);
EvalReport read_report(const std::filesystem::path& path);

}  // namespace lanecast
