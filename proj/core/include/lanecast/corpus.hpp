#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "lanecast/synth.hpp"

namespace lanecast {

/// Highway situations of the synthetic benchmark corpus. Every scenario
/// yields exactly one window whose target is the scripted vehicle.
enum class ScenarioFamily : int { left_change = 0, right_change = 1, cruise = 2, blocked = 3 };

std::string_view to_string(ScenarioFamily family) noexcept;

struct CorpusSpec {
  std::size_t windows = 2000;
  double left_share = 0.4;
  double right_share = 0.4;
  double noise = 0.05;
  double lane_width = 3.5;
};

struct CorpusScenario {
  ScenarioSpec spec;
  SampleWindow window;
  ScenarioFamily family = ScenarioFamily::cruise;
};

inline constexpr FrameIndex kScenarioFrames = 100;
inline constexpr FrameIndex kScenarioSpacing = 200;
inline constexpr FrameIndex kScenarioT0 = 29;

std::vector<CorpusScenario> plan_corpus(const CorpusSpec& spec, std::uint64_t seed);

struct Corpus {
  std::vector<TrajectoryRecord> records;
  std::vector<SampleWindow> windows;
  std::vector<ScenarioFamily> families;
};

Corpus generate_corpus(const CorpusSpec& spec, std::uint64_t seed);

/// A scripted scene, the neighbour to delete, and the expected prediction
/// before and after the deletion.
struct InterventionFixture {
  ScenarioSpec spec;
  std::uint64_t seed = 0;
  SampleWindow window;
  VehicleId removable = 0;
  Maneuver before = Maneuver::straight;
  Maneuver after = Maneuver::straight;
};

/// Slower leader ahead, free left lane. Deleting the leader should leave
/// no reason to change lanes.
InterventionFixture slower_leader_fixture();

/// Slower leader, a fast vehicle approaching from rear left, right lane
/// occupied. Deleting the rear-left vehicle frees the left lane.
InterventionFixture rear_left_blocker_fixture();

}  // namespace lanecast
