#include "lanecast/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "lanecast/parallel.hpp"

namespace lanecast {

std::array<std::array<double, 2>, kPredictionSteps> true_positions(const Sample& sample) {
  std::array<std::array<double, 2>, kPredictionSteps> out{};
  for (std::size_t t = 0; t < kPredictionSteps; ++t) {
    out[t] = {sample.origin_x + sample.raw_offsets[2 * t], sample.origin_y + sample.raw_offsets[2 * t + 1]};
  }
  return out;
}

EvalReport score(std::span<const SamplePrediction> predictions, std::span<const Sample> truth, std::string fingerprint) {
  if (truth.empty()) throw std::invalid_argument("evaluate: empty test set");
  if (predictions.size() != truth.size()) throw std::invalid_argument("evaluate: prediction and truth counts differ");
  EvalReport report;
  report.sample_count = truth.size();
  report.fingerprint = std::move(fingerprint);
  std::array<double, kPredictionSteps> sq{};
  std::array<std::size_t, kPredictionSteps> hits{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto actual = true_positions(truth[i]);
    for (std::size_t t = 0; t < kPredictionSteps; ++t) {
      const double dx = predictions[i].positions[t][0] - actual[t][0];
      const double dy = predictions[i].positions[t][1] - actual[t][1];
      sq[t] += dx * dx + dy * dy;
      const auto want = static_cast<std::size_t>(truth[i].maneuvers[t]);
      const auto got = static_cast<std::size_t>(predictions[i].maneuvers[t]);
      ++report.confusion[t][want][got];
      if (want == got) ++hits[t];
    }
  }
  const auto n = static_cast<double>(truth.size());
  for (std::size_t t = 0; t < kPredictionSteps; ++t) {
    report.rmse[t] = std::sqrt(sq[t] / n);
    report.accuracy[t] = static_cast<double>(hits[t]) / n;
  }
  return report;
}

std::vector<SamplePrediction> predict_samples(const Predictor& predictor, std::span<const Sample> samples,
                                              std::size_t workers) {
  std::vector<SamplePrediction> out(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const auto p = predictor.predict(samples[i].input, samples[i].origin_x, samples[i].origin_y);
    out[i].maneuvers = p.classification.sequence;
    out[i].positions = p.trajectory.positions;
  }, workers);
  return out;
}

EvalReport evaluate(const Predictor& predictor, std::span<const Sample> samples, std::string fingerprint,
                    std::size_t workers) {
  if (samples.empty()) throw std::invalid_argument("evaluate: empty test set");
  const auto predictions = predict_samples(predictor, samples, workers);
  return score(predictions, samples, std::move(fingerprint));
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv" || name == "delimited") return ReportFormat::delimited;
  if (name == "json" || name == "structured") return ReportFormat::structured;
  throw std::invalid_argument("unknown report format '" + std::string(name) + "' (expected csv or json)");
}

std::string format_report(const EvalReport& report, ReportFormat format) {
  if (format == ReportFormat::delimited) {
    std::string out = "horizon_s,rmse_m,acc,n\n";
    char line[96];
    for (std::size_t t = 0; t < kPredictionSteps; ++t) {
      std::snprintf(line, sizeof line, "%zu,%.6f,%.6f,%zu\n", t + 1, report.rmse[t], report.accuracy[t],
                    report.sample_count);
      out += line;
    }
    return out;
  }
  nlohmann::ordered_json j;
  j["fingerprint"] = report.fingerprint;
  j["sample_count"] = report.sample_count;
  j["rmse_m"] = report.rmse;
  j["accuracy"] = report.accuracy;
  j["confusion"] = report.confusion;
  return j.dump(2) + "\n";
}

void export_report(const EvalReport& report, const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write report to " + path.string());
  out << format_report(report, format);
  if (!out) throw std::runtime_error("failed writing report to " + path.string());
}

EvalReport parse_report(std::string_view json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    EvalReport r;
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.sample_count = j.at("sample_count").get<std::size_t>();
    r.rmse = j.at("rmse_m").get<decltype(r.rmse)>();
    r.accuracy = j.at("accuracy").get<decltype(r.accuracy)>();
    r.confusion = j.at("confusion").get<decltype(r.confusion)>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
}

EvalReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read report " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_report(buf.str());
}

}  // namespace lanecast
