#pragma once

#include <span>
#include <vector>

#include "lanecast/neighborhood.hpp"
#include "lanecast/trajectory.hpp"

namespace lanecast {

/// A labelled prediction sample ready for either network.
struct Sample {
  SampleWindow window;
  Tensor3<Real> input;           // normalized network input
  std::array<bool, kSlots> mask{};
  ManeuverSequence maneuvers{};  // ground truth
  OffsetArray offsets{};         // normalized targets
  OffsetArray raw_offsets{};     // meters, relative to the t0 position
  double origin_x = 0.0;
  double origin_y = 0.0;
};

struct DatasetOptions {
  SlotRules slots;
  bool normalize = true;
};

struct PreparedData {
  Normalizer normalizer;
  std::vector<Sample> train;
  std::vector<Sample> val;
  std::vector<Sample> test;
};

/// Builds samples for every window whose target belongs to one of the
/// splits. Normalization statistics come from the training split only.
PreparedData prepare_dataset(const SceneIndex& index, std::span<const SampleWindow> windows,
                             const VehicleSplit& split, const DatasetOptions& options = {});

/// Samples for the given windows with an existing normalizer.
std::vector<Sample> build_samples(const SceneIndex& index, std::span<const SampleWindow> windows,
                                  const Normalizer& normalizer, const SlotRules& rules = {});

std::array<Real, kPredictionSteps> maneuver_inputs(const ManeuverSequence& maneuvers);

}  // namespace lanecast
