// Dataset-specific readers. Everything is adapted into TrajectoryRecord at
// 10 Hz with x along the driving direction and lane ids growing leftward.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "lanecast/trajectory.hpp"

namespace lanecast {

namespace {

constexpr double kFeetToMeters = 0.3048;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

struct Table {
  struct Row {
    std::size_t line = 0;
    std::vector<std::string_view> fields;
  };
  std::vector<std::string> header;
  std::vector<Row> rows;

  [[nodiscard]] std::optional<std::size_t> column(std::initializer_list<std::string_view> names) const {
    for (auto name : names) {
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
      }
    }
    return std::nullopt;
  }

  [[nodiscard]] std::size_t require(std::initializer_list<std::string_view> names) const {
    if (auto c = column(names)) return *c;
    throw ParseError(1, "missing required column '" + std::string(*names.begin()) + "'");
  }
};

Table read_table(std::string_view text) {
  Table table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (table.header.empty()) {
      for (auto f : split_fields(line)) table.header.emplace_back(f);
      continue;
    }
    auto fields = split_fields(line);
    if (fields.size() != table.header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(table.header.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    table.rows.push_back({line_no, std::move(fields)});
    if (end == text.size()) break;
  }
  return table;
}

template <typename T>
T number(const Table& table, const Table::Row& row, std::size_t col) {
  const std::string_view field = row.fields[col];
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError(row.line, "column '" + table.header[col] + "' has non-numeric value '" + std::string(field) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ParseError(row.line, "column '" + table.header[col] + "' is not finite");
  }
  return value;
}

struct RawSample {
  std::size_t line = 0;
  FrameIndex frame = 0;
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;
  double a = 0.0;
  int lane = 0;
};

using RawTracks = std::map<VehicleId, std::vector<RawSample>>;

void check_monotone(const RawTracks& tracks) {
  for (const auto& [id, samples] : tracks) {
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (samples[i].frame <= samples[i - 1].frame) {
        throw ParseError(samples[i].line, "frames of vehicle " + std::to_string(id) + " are not strictly increasing (" +
                                              std::to_string(samples[i - 1].frame) + " then " +
                                              std::to_string(samples[i].frame) + ")");
      }
      if (samples[i].frame != samples[i - 1].frame + 1) {
        throw ParseError(samples[i].line, "frames of vehicle " + std::to_string(id) + " are not consecutive (" +
                                              std::to_string(samples[i - 1].frame) + " then " +
                                              std::to_string(samples[i].frame) + ")");
      }
    }
  }
}

/// Linear interpolation of a track sampled at `rate` onto the 10 Hz grid.
/// Lane ids are taken from the latest source sample at or before each time.
std::vector<RawSample> resample(const std::vector<RawSample>& track, double rate) {
  if (track.empty() || std::abs(rate - kFrameRate) < 1e-12) return track;
  const double t_first = static_cast<double>(track.front().frame) / rate;
  const double t_last = static_cast<double>(track.back().frame) / rate;
  const auto f_first = static_cast<FrameIndex>(std::ceil(t_first * kFrameRate - 1e-9));
  const auto f_last = static_cast<FrameIndex>(std::floor(t_last * kFrameRate + 1e-9));
  std::vector<RawSample> out;
  std::size_t j = 0;
  for (FrameIndex f = f_first; f <= f_last; ++f) {
    const double t = static_cast<double>(f) / kFrameRate;
    while (j + 1 < track.size() && static_cast<double>(track[j + 1].frame) / rate <= t + 1e-12) ++j;
    const RawSample& lo = track[j];
    const RawSample& hi = track[std::min(j + 1, track.size() - 1)];
    const double t_lo = static_cast<double>(lo.frame) / rate;
    const double t_hi = static_cast<double>(hi.frame) / rate;
    const double w = t_hi > t_lo ? std::clamp((t - t_lo) / (t_hi - t_lo), 0.0, 1.0) : 0.0;
    RawSample s;
    s.line = lo.line;
    s.frame = f;
    s.x = lo.x + w * (hi.x - lo.x);
    s.y = lo.y + w * (hi.y - lo.y);
    s.v = lo.v + w * (hi.v - lo.v);
    s.a = lo.a + w * (hi.a - lo.a);
    s.lane = lo.lane;
    out.push_back(s);
  }
  return out;
}

std::vector<TrajectoryRecord> finish(RawTracks& tracks, double rate, bool has_kinematics, std::size_t smoothing) {
  std::vector<TrajectoryRecord> records;
  for (auto& [id, samples] : tracks) {
    const auto resampled = resample(samples, rate);
    const std::size_t start = records.size();
    for (const auto& s : resampled) records.push_back({id, s.frame, s.x, s.y, s.v, s.a, s.lane});
    if (!has_kinematics) {
      derive_kinematics(std::span<TrajectoryRecord>(records).subspan(start), smoothing);
    }
  }
  return records;
}

std::vector<TrajectoryRecord> read_canonical(const Table& table, const ReaderOptions& options) {
  const auto c_id = table.require({"vehicle_id", "id"});
  const auto c_frame = table.require({"frame"});
  const auto c_x = table.require({"x"});
  const auto c_y = table.require({"y"});
  const auto c_lane = table.require({"lane_id", "lane"});
  const auto c_v = table.column({"v"});
  const auto c_a = table.column({"a"});
  const bool has_kinematics = c_v.has_value() && c_a.has_value();
  RawTracks tracks;
  for (const auto& row : table.rows) {
    RawSample s;
    s.line = row.line;
    s.frame = number<FrameIndex>(table, row, c_frame);
    s.x = number<double>(table, row, c_x);
    s.y = number<double>(table, row, c_y);
    s.lane = number<int>(table, row, c_lane);
    if (has_kinematics) {
      s.v = number<double>(table, row, *c_v);
      s.a = number<double>(table, row, *c_a);
    }
    tracks[number<VehicleId>(table, row, c_id)].push_back(s);
  }
  check_monotone(tracks);
  const double rate = options.source_rate > 0.0 ? options.source_rate : kFrameRate;
  return finish(tracks, rate, has_kinematics, std::max<std::size_t>(options.smoothing, 1));
}

// highD tracks: bounding-box corner in image coordinates at 25 Hz, two
// driving directions per recording. Vehicles driving toward -x are rotated
// by 180 degrees; vehicles driving toward +x have their lane numbering
// mirrored inside their own lane group so ids grow toward the driver's left.
std::vector<TrajectoryRecord> read_highd(const Table& table, const ReaderOptions& options) {
  const auto c_id = table.require({"id"});
  const auto c_frame = table.require({"frame"});
  const auto c_x = table.require({"x"});
  const auto c_y = table.require({"y"});
  const auto c_lane = table.require({"laneId"});
  const auto c_w = table.column({"width"});
  const auto c_h = table.column({"height"});
  const auto c_v = table.column({"xVelocity"});
  const auto c_a = table.column({"xAcceleration"});
  const bool has_kinematics = c_v.has_value() && c_a.has_value();
  RawTracks tracks;
  for (const auto& row : table.rows) {
    RawSample s;
    s.line = row.line;
    s.frame = number<FrameIndex>(table, row, c_frame);
    s.x = number<double>(table, row, c_x) + (c_w ? number<double>(table, row, *c_w) / 2.0 : 0.0);
    s.y = number<double>(table, row, c_y) + (c_h ? number<double>(table, row, *c_h) / 2.0 : 0.0);
    s.lane = number<int>(table, row, c_lane);
    if (has_kinematics) {
      s.v = number<double>(table, row, *c_v);
      s.a = number<double>(table, row, *c_a);
    }
    tracks[number<VehicleId>(table, row, c_id)].push_back(s);
  }
  check_monotone(tracks);

  std::map<VehicleId, int> direction;
  int lane_min[2] = {1 << 30, 1 << 30};
  int lane_max[2] = {-(1 << 30), -(1 << 30)};
  for (const auto& [id, samples] : tracks) {
    const double dx = samples.back().x - samples.front().x;
    double mean_v = 0.0;
    for (const auto& s : samples) mean_v += s.v;
    const int dir = (has_kinematics ? mean_v : dx) >= 0.0 ? 1 : -1;
    direction[id] = dir;
    const int g = dir > 0 ? 1 : 0;
    for (const auto& s : samples) {
      lane_min[g] = std::min(lane_min[g], s.lane);
      lane_max[g] = std::max(lane_max[g], s.lane);
    }
  }
  for (auto& [id, samples] : tracks) {
    const int dir = direction[id];
    for (auto& s : samples) {
      if (dir > 0) {
        // image y grows downward, the driver's left is up
        s.y = -s.y;
        s.lane = lane_min[1] + lane_max[1] - s.lane;
      } else {
        s.x = -s.x;
        s.v = -s.v;
        s.a = -s.a;
      }
    }
  }
  const double rate = options.source_rate > 0.0 ? options.source_rate : 25.0;
  return finish(tracks, rate, has_kinematics, std::max<std::size_t>(options.smoothing, 1));
}

// NGSIM: feet, Local_Y longitudinal, Local_X lateral growing to the right,
// lane 1 is the leftmost lane. Velocity and acceleration are re-derived from
// smoothed positions because the published ones are noisy.
std::vector<TrajectoryRecord> read_ngsim(const Table& table, const ReaderOptions& options) {
  const auto c_id = table.require({"Vehicle_ID"});
  const auto c_frame = table.require({"Frame_ID"});
  const auto c_lat = table.require({"Local_X"});
  const auto c_lon = table.require({"Local_Y"});
  const auto c_lane = table.require({"Lane_ID"});
  RawTracks tracks;
  int max_lane = 0;
  for (const auto& row : table.rows) {
    RawSample s;
    s.line = row.line;
    s.frame = number<FrameIndex>(table, row, c_frame);
    s.x = number<double>(table, row, c_lon) * kFeetToMeters;
    s.y = -number<double>(table, row, c_lat) * kFeetToMeters;
    s.lane = number<int>(table, row, c_lane);
    max_lane = std::max(max_lane, s.lane);
    tracks[number<VehicleId>(table, row, c_id)].push_back(s);
  }
  check_monotone(tracks);
  for (auto& [id, samples] : tracks) {
    for (auto& s : samples) s.lane = s.lane > 0 ? max_lane + 1 - s.lane : 0;
  }
  const double rate = options.source_rate > 0.0 ? options.source_rate : kFrameRate;
  const std::size_t smoothing = options.smoothing > 0 ? options.smoothing : 5;
  return finish(tracks, rate, false, smoothing);
}

}  // namespace

TrajectoryFormat parse_trajectory_format(std::string_view tag) {
  if (tag == "canonical") return TrajectoryFormat::canonical;
  if (tag == "highd") return TrajectoryFormat::highd;
  if (tag == "ngsim") return TrajectoryFormat::ngsim;
  throw std::invalid_argument("unknown trajectory format '" + std::string(tag) + "' (expected canonical, highd or ngsim)");
}

std::string_view to_string(TrajectoryFormat format) noexcept {
  switch (format) {
    case TrajectoryFormat::canonical: return "canonical";
    case TrajectoryFormat::highd: return "highd";
    case TrajectoryFormat::ngsim: return "ngsim";
  }
  return "unknown";
}

std::vector<TrajectoryRecord> parse_trajectory_text(std::string_view text, TrajectoryFormat format,
                                                    const ReaderOptions& options) {
  const Table table = read_table(text);
  if (table.header.empty()) return {};
  switch (format) {
    case TrajectoryFormat::canonical: return read_canonical(table, options);
    case TrajectoryFormat::highd: return read_highd(table, options);
    case TrajectoryFormat::ngsim: return read_ngsim(table, options);
  }
  return {};
}

std::vector<TrajectoryRecord> parse_trajectory_file(const std::filesystem::path& path, TrajectoryFormat format,
                                                    const ReaderOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trajectory file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_trajectory_text(buffer.str(), format, options);
}

}  // namespace lanecast
