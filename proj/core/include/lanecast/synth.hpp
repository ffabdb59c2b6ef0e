#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lanecast/neighborhood.hpp"
#include "lanecast/trajectory.hpp"

namespace lanecast {

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Quintic lateral profile with zero slope and curvature at both ends:
/// 10 s^3 - 15 s^4 + 6 s^5 for s in [0, 1].
double lane_change_profile(double s) noexcept;

struct LaneChangeCommand {
  Maneuver direction = Maneuver::left;
  double start = 0.0;     // s
  double duration = 4.0;  // s
};

/// Replaces the baseline acceleration with `accel` on [start, start + duration).
struct SpeedCommand {
  double start = 0.0;
  double duration = 0.0;
  double accel = 0.0;
};

struct VehicleScript {
  VehicleId id = 0;
  double x = 0.0;    // m at t = 0
  int lane = 1;      // 1 = rightmost
  double v = 0.0;    // m/s at t = 0
  double a = 0.0;    // baseline longitudinal acceleration, m/s^2
  std::optional<LaneChangeCommand> lane_change;
  std::optional<SpeedCommand> speed_change;
};

struct ScenarioSpec {
  int lanes = 3;
  double lane_width = 3.5;
  double duration = 10.0;  // s, sampled at 10 Hz
  double noise = 0.0;      // std of positional jitter, m
  FrameIndex first_frame = 0;
  std::vector<VehicleScript> vehicles;
};

struct LongitudinalState {
  double x = 0.0;
  double v = 0.0;
  double a = 0.0;
};

/// Exact piecewise-constant-acceleration kinematics of a script at time t.
LongitudinalState longitudinal_at(const VehicleScript& vehicle, double t);

double lane_center(int lane, double lane_width) noexcept;

void validate(const ScenarioSpec& spec);

/// Kinematically consistent 10 Hz records sorted by (vehicle_id, frame).
/// The lane id switches at the first frame at or after the lateral
/// midpoint. Noise jitters x and y only.
std::vector<TrajectoryRecord> generate(const ScenarioSpec& spec, std::uint64_t seed);

/// Removes every record of one vehicle.
std::vector<TrajectoryRecord> edit_scene(std::span<const TrajectoryRecord> records, VehicleId removal);

}  // namespace lanecast
