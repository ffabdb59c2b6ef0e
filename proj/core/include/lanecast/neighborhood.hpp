#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lanecast/network.hpp"
#include "lanecast/tensor.hpp"
#include "lanecast/trajectory.hpp"

namespace lanecast {

/// Tensor row order. Neighbours on the same side stay adjacent.
enum class NeighborSlot : std::uint8_t { T = 0, F = 1, FL = 2, L = 3, RL = 4, FR = 5, R = 6, RR = 7 };
inline constexpr std::size_t kSlots = 8;
inline constexpr std::size_t kChannels = 4;  // x, y, v, a

std::string_view to_string(NeighborSlot slot) noexcept;

/// The slot obtained by mirroring the road across the driving axis.
NeighborSlot mirrored(NeighborSlot slot) noexcept;

struct SlotRules {
  /// Longitudinal gate for the side slots L and R, meters.
  double side_gate = 15.0;
};

struct SlotAssignment {
  std::array<std::optional<VehicleId>, kSlots> vehicles{};

  [[nodiscard]] bool occupied(NeighborSlot s) const noexcept { return vehicles[static_cast<std::size_t>(s)].has_value(); }
  [[nodiscard]] std::optional<VehicleId> operator[](NeighborSlot s) const noexcept {
    return vehicles[static_cast<std::size_t>(s)];
  }
  friend bool operator==(const SlotAssignment&, const SlotAssignment&) = default;
};

/// F is the nearest same-lane vehicle ahead. In each adjacent lane the side
/// slot takes the vehicle with the smallest |dx| within the gate; the front
/// and rear slots take the nearest remaining vehicle ahead (dx >= 0) and
/// behind (dx < 0). Ties go to the smaller vehicle id.
SlotAssignment assign_slots(const Scene& scene, VehicleId target, const SlotRules& rules = {});

enum class Maneuver : int { straight = 0, left = 1, right = 2 };
using ManeuverSequence = std::array<Maneuver, kPredictionSteps>;

std::string_view to_string(Maneuver m) noexcept;

/// Per-channel z-score statistics for inputs and per-axis statistics for
/// the predicted offsets.
struct Normalizer {
  std::array<double, kChannels> input_mean{0.0, 0.0, 0.0, 0.0};
  std::array<double, kChannels> input_std{1.0, 1.0, 1.0, 1.0};
  std::array<double, 2> output_mean{0.0, 0.0};
  std::array<double, 2> output_std{1.0, 1.0};

  static Normalizer identity() { return {}; }

  /// FNV-1a over the statistics; used to check that two models agree.
  [[nodiscard]] std::uint64_t hash() const noexcept;

  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

/// 4x8x30 input for one sample. Columns run oldest to newest. Positions are
/// relative to the target at t0. Entries of absent vehicles are exactly zero.
struct NeighborhoodTensor {
  Tensor3<Real> values{kChannels, kSlots, static_cast<std::size_t>(kHistoryFrames)};
  std::array<bool, kSlots> mask{};
  std::array<std::array<bool, static_cast<std::size_t>(kHistoryFrames)>, kSlots> present{};
  SlotAssignment slots;
  double origin_x = 0.0;
  double origin_y = 0.0;
};

/// Un-normalized tensor (identity statistics).
NeighborhoodTensor build_raw_tensor(const SampleWindow& window, const SceneIndex& index, const SlotRules& rules = {});
void normalize_tensor(NeighborhoodTensor& tensor, const Normalizer& normalizer);
NeighborhoodTensor build_tensor(const SampleWindow& window, const SceneIndex& index, const Normalizer& normalizer,
                                const SlotRules& rules = {});

/// Labels each prediction step t = 1..5 s as a lane change when it lies
/// within 2 s of a lane-id change in that direction; the nearest crossing
/// wins. `lane_ids[t0_index]` is the lane at t0, one entry per 10 Hz frame.
ManeuverSequence label_maneuvers(std::span<const int> lane_ids, std::size_t t0_index);
ManeuverSequence label_maneuvers(const SampleWindow& window, const SceneIndex& index);

using OffsetArray = std::array<double, kPredictionSteps * 2>;

/// Target displacement at 1..5 s relative to its position at t0, laid out
/// (x1, y1, x2, y2, ...).
OffsetArray target_offsets(const SampleWindow& window, const SceneIndex& index);
OffsetArray normalize_offsets(const OffsetArray& raw, const Normalizer& normalizer);
OffsetArray denormalize_offsets(const OffsetArray& normalized, const Normalizer& normalizer);

/// Accumulates statistics over raw tensors and raw offsets of the training split.
class NormalizerFit {
 public:
  void add(const NeighborhoodTensor& raw_tensor);
  void add(const OffsetArray& raw_offsets);
  [[nodiscard]] Normalizer result() const;

 private:
  std::array<double, kChannels> sum_{};
  std::array<double, kChannels> sq_{};
  double count_ = 0.0;
  std::array<double, 2> out_sum_{};
  std::array<double, 2> out_sq_{};
  double out_count_ = 0.0;
};

}  // namespace lanecast
