#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lanecast {

using VehicleId = std::int64_t;
using FrameIndex = std::int64_t;

inline constexpr double kFrameRate = 10.0;
inline constexpr double kFrameDt = 1.0 / kFrameRate;
inline constexpr FrameIndex kHistoryFrames = 30;
inline constexpr FrameIndex kFramesPerStep = 10;
inline constexpr FrameIndex kFutureFrames = 50;
inline constexpr FrameIndex kWindowFrames = kHistoryFrames + kFutureFrames;

/// One vehicle state at one 10 Hz frame in the road frame: x along the
/// driving direction, y toward the left neighbouring lane. Lane ids grow
/// toward the left; ids <= 0 mean "unknown".
struct TrajectoryRecord {
  VehicleId vehicle_id = 0;
  FrameIndex frame = 0;
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;
  double a = 0.0;
  int lane_id = 0;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

enum class TrajectoryFormat { canonical, highd, ngsim };

TrajectoryFormat parse_trajectory_format(std::string_view tag);
std::string_view to_string(TrajectoryFormat format) noexcept;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct ReaderOptions {
  /// Native sample rate of the source table; tracks are resampled to 10 Hz.
  /// Zero selects the format default (highD 25 Hz, NGSIM and canonical 10 Hz).
  double source_rate = 0.0;
  /// Centered moving-average width applied to positions before deriving v
  /// and a. Zero selects the format default (NGSIM 5, otherwise 1).
  std::size_t smoothing = 0;
};

/// Parses a delimited trajectory table. Output is sorted by (vehicle_id,
/// frame). Missing v/a columns are finite-differenced from positions.
std::vector<TrajectoryRecord> parse_trajectory_text(std::string_view text, TrajectoryFormat format,
                                                    const ReaderOptions& options = {});
std::vector<TrajectoryRecord> parse_trajectory_file(const std::filesystem::path& path, TrajectoryFormat format,
                                                    const ReaderOptions& options = {});

/// Header `vehicle_id,frame,x,y,v,a,lane_id`; values printed with enough
/// digits to re-parse bit-identically.
void write_canonical(std::ostream& out, std::span<const TrajectoryRecord> records);
void write_canonical_file(const std::filesystem::path& path, std::span<const TrajectoryRecord> records);

/// Central differences (one-sided at the ends) of the track's x, after an
/// optional centered moving average of `smoothing` frames. The track must be
/// one vehicle with consecutive frames.
void derive_kinematics(std::span<TrajectoryRecord> track, std::size_t smoothing = 1, double dt = kFrameDt);

/// All records at one frame, sorted by vehicle id.
struct Scene {
  FrameIndex frame = 0;
  std::vector<TrajectoryRecord> records;

  [[nodiscard]] const TrajectoryRecord* find(VehicleId id) const noexcept;
};

/// Frame- and vehicle-indexed view over a record set.
class SceneIndex {
 public:
  SceneIndex() = default;
  explicit SceneIndex(std::span<const TrajectoryRecord> records);

  [[nodiscard]] const Scene* scene(FrameIndex frame) const noexcept;
  [[nodiscard]] const TrajectoryRecord* record(VehicleId id, FrameIndex frame) const noexcept;
  [[nodiscard]] std::vector<VehicleId> vehicles() const;

  struct TrackSpan {
    FrameIndex first = 0;
    FrameIndex last = 0;
    [[nodiscard]] FrameIndex length() const noexcept { return last - first + 1; }
  };
  [[nodiscard]] std::optional<TrackSpan> track(VehicleId id) const noexcept;

 private:
  std::unordered_map<FrameIndex, Scene> scenes_;
  std::unordered_map<VehicleId, TrackSpan> tracks_;
};

/// One prediction sample: history frames t0-29..t0, future t0+1..t0+50.
struct SampleWindow {
  VehicleId target_id = 0;
  FrameIndex t0_frame = 0;

  [[nodiscard]] FrameIndex history_begin() const noexcept { return t0_frame - kHistoryFrames + 1; }
  [[nodiscard]] FrameIndex future_end() const noexcept { return t0_frame + kFutureFrames; }

  friend bool operator==(const SampleWindow&, const SampleWindow&) = default;
};

/// Windows start every `stride` frames for each vehicle with at least 80
/// frames; a track of length L yields floor((L - 80) / stride) + 1 windows.
std::vector<SampleWindow> extract_windows(const SceneIndex& index, FrameIndex stride = 10);
std::vector<SampleWindow> extract_windows(std::span<const TrajectoryRecord> records, FrameIndex stride = 10);

struct VehicleSplit {
  std::vector<VehicleId> train;
  std::vector<VehicleId> val;
  std::vector<VehicleId> test;
};

/// Seeded random partition of vehicle ids. Sizes follow the largest
/// remainder rule on the given fractions.
VehicleSplit split_by_vehicle(std::span<const VehicleId> ids, std::array<double, 3> fractions, std::uint64_t seed);
VehicleSplit split_by_vehicle(std::span<const TrajectoryRecord> records, std::array<double, 3> fractions,
                              std::uint64_t seed);

void write_id_list(const std::filesystem::path& path, std::span<const VehicleId> ids);
std::vector<VehicleId> read_id_list(const std::filesystem::path& path);

void write_window_list(const std::filesystem::path& path, std::span<const SampleWindow> windows);
std::vector<SampleWindow> read_window_list(const std::filesystem::path& path);

}  // namespace lanecast
