#include "lanecast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

namespace lanecast {

double lane_change_profile(double s) noexcept {
  s = std::clamp(s, 0.0, 1.0);
  const double s3 = s * s * s;
  return s3 * (10.0 - 15.0 * s + 6.0 * s * s);
}

double lane_center(int lane, double lane_width) noexcept { return (static_cast<double>(lane) - 0.5) * lane_width; }

LongitudinalState longitudinal_at(const VehicleScript& vehicle, double t) {
  struct Phase {
    double begin;
    double accel;
  };
  std::vector<Phase> phases{{0.0, vehicle.a}};
  if (vehicle.speed_change) {
    const auto& c = *vehicle.speed_change;
    phases.push_back({c.start, c.accel});
    phases.push_back({c.start + c.duration, vehicle.a});
  }
  LongitudinalState s{vehicle.x, vehicle.v, vehicle.a};
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const double begin = phases[i].begin;
    const double end = i + 1 < phases.size() ? phases[i + 1].begin : t;
    if (t < begin) break;
    const double dt = std::min(t, end) - begin;
    if (dt < 0.0) break;
    s.x += s.v * dt + 0.5 * phases[i].accel * dt * dt;
    s.v += phases[i].accel * dt;
    s.a = phases[i].accel;
    if (t < end) break;
  }
  return s;
}

void validate(const ScenarioSpec& spec) {
  if (spec.lanes < 1) throw ScenarioError("scenario: at least one lane required");
  if (!(spec.lane_width > 0.0)) throw ScenarioError("scenario: lane width must be positive");
  if (!(spec.duration >= 8.0)) throw ScenarioError("scenario: duration must be at least 8 s so one full window exists");
  if (!(spec.noise >= 0.0)) throw ScenarioError("scenario: noise must be non-negative");
  std::set<VehicleId> ids;
  for (const auto& v : spec.vehicles) {
    const std::string who = "vehicle " + std::to_string(v.id);
    if (!ids.insert(v.id).second) throw ScenarioError("scenario: duplicate " + who);
    if (v.lane < 1 || v.lane > spec.lanes) throw ScenarioError("scenario: " + who + " starts in nonexistent lane " + std::to_string(v.lane));
    if (v.lane_change) {
      const auto& lc = *v.lane_change;
      if (lc.direction == Maneuver::straight) throw ScenarioError("scenario: " + who + " lane change needs a direction");
      const int target = v.lane + (lc.direction == Maneuver::left ? 1 : -1);
      if (target < 1 || target > spec.lanes) throw ScenarioError("scenario: " + who + " lane change targets nonexistent lane " + std::to_string(target));
      if (!(lc.duration > 0.0)) throw ScenarioError("scenario: " + who + " lane change duration must be positive");
    }
    if (v.speed_change && !(v.speed_change->duration >= 0.0)) {
      throw ScenarioError("scenario: " + who + " speed change duration must be non-negative");
    }
    if (v.v < 0.0) throw ScenarioError("scenario: " + who + " has negative speed");
    std::vector<double> checkpoints{spec.duration};
    if (v.speed_change) {
      checkpoints.push_back(v.speed_change->start);
      checkpoints.push_back(v.speed_change->start + v.speed_change->duration);
    }
    for (double t : checkpoints) {
      if (t >= 0.0 && longitudinal_at(v, std::min(t, spec.duration)).v < -1e-9) {
        throw ScenarioError("scenario: " + who + " would reverse (negative speed)");
      }
    }
  }
}

std::vector<TrajectoryRecord> generate(const ScenarioSpec& spec, std::uint64_t seed) {
  validate(spec);
  const auto frames = static_cast<FrameIndex>(std::llround(spec.duration * kFrameRate));
  std::vector<VehicleScript> vehicles = spec.vehicles;
  std::sort(vehicles.begin(), vehicles.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::vector<TrajectoryRecord> out;
  out.reserve(vehicles.size() * static_cast<std::size_t>(frames));
  for (const auto& veh : vehicles) {
    const double y0 = lane_center(veh.lane, spec.lane_width);
    for (FrameIndex k = 0; k < frames; ++k) {
      const double t = static_cast<double>(k) / kFrameRate;
      const auto lon = longitudinal_at(veh, t);
      TrajectoryRecord r;
      r.vehicle_id = veh.id;
      r.frame = spec.first_frame + k;
      r.x = lon.x;
      r.v = lon.v;
      r.a = lon.a;
      r.y = y0;
      r.lane_id = veh.lane;
      if (veh.lane_change) {
        const auto& lc = *veh.lane_change;
        const double sign = lc.direction == Maneuver::left ? 1.0 : -1.0;
        r.y = y0 + sign * spec.lane_width * lane_change_profile((t - lc.start) / lc.duration);
        if (t >= lc.start + 0.5 * lc.duration - 1e-9) r.lane_id = veh.lane + (lc.direction == Maneuver::left ? 1 : -1);
      }
      if (spec.noise > 0.0) {
        r.x += spec.noise * jitter(rng);
        r.y += spec.noise * jitter(rng);
      }
      out.push_back(r);
    }
  }
  return out;
}

std::vector<TrajectoryRecord> edit_scene(std::span<const TrajectoryRecord> records, VehicleId removal) {
  std::vector<TrajectoryRecord> out;
  out.reserve(records.size());
  bool found = false;
  for (const auto& r : records) {
    if (r.vehicle_id == removal) {
      found = true;
    } else {
      out.push_back(r);
    }
  }
  if (!found) throw std::invalid_argument("edit_scene: vehicle " + std::to_string(removal) + " does not exist");
  return out;
}

}  // namespace lanecast
