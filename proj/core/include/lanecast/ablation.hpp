#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lanecast/dataset.hpp"
#include "lanecast/evaluation.hpp"
#include "lanecast/training.hpp"

namespace lanecast {

enum class AblationVariant {
  full,
  only_xy_channels,
  without_neighborhood,
  shuffled_neighborhood,
  without_dilation,
  without_maneuver,
  sampled_maneuver,
};

std::string_view to_string(AblationVariant variant) noexcept;
AblationVariant parse_variant(std::string_view name);
std::span<const AblationVariant> all_variants() noexcept;

/// The code paths a variant can switch. `full` uses the defaults.
struct VariantProfile {
  std::size_t input_channels = kChannels;  // 2 keeps only x and y
  bool neighbors = true;                   // false zeroes every non-target row
  bool shuffled_rows = false;              // fixed seeded slot-row permutation
  bool dilated = true;
  bool maneuver_input = true;
  bool sampled_maneuvers = false;  // regressor fed sequences drawn from the training labels

  [[nodiscard]] std::string fingerprint() const;
  /// Number of fields that differ.
  [[nodiscard]] int differences(const VariantProfile& other) const noexcept;
  friend bool operator==(const VariantProfile&, const VariantProfile&) = default;
};

VariantProfile profile_of(AblationVariant variant) noexcept;

NetworkConfig network_config(ModuleKind kind, const VariantProfile& profile);

using RowPermutation = std::array<std::size_t, kSlots>;

/// Seeded permutation of the slot rows; never the identity.
RowPermutation row_permutation(std::uint64_t seed);

Tensor3<Real> apply_profile(const Tensor3<Real>& input, const VariantProfile& profile, const RowPermutation& rows);
std::vector<Sample> apply_profile(std::span<const Sample> samples, const VariantProfile& profile,
                                  const RowPermutation& rows);

/// Empirical distribution of whole label sequences; draws are deterministic
/// for a seed.
class SequenceSampler {
 public:
  explicit SequenceSampler(std::span<const Sample> training);
  [[nodiscard]] std::vector<ManeuverSequence> draw(std::size_t count, std::uint64_t seed) const;

 private:
  std::vector<ManeuverSequence> pool_;
};

struct TrainedPair {
  TrainResult classifier;
  TrainResult regressor;
};

TrainedPair train_pair(const PreparedData& data, const TrainConfig& config, const VariantProfile& profile = {},
                       const EpochCallback& on_classifier_epoch = {}, const EpochCallback& on_regressor_epoch = {});

struct AblationResult {
  AblationVariant variant = AblationVariant::full;
  VariantProfile profile;
  std::size_t parameter_count = 0;
  EvalReport report;
};

/// Retrains both networks from scratch for the variant and evaluates them on
/// the test split. `seed` fixes the row permutation and sequence draws.
AblationResult run_ablation(AblationVariant variant, const PreparedData& data, const TrainConfig& config,
                            std::uint64_t seed, const EpochCallback& on_epoch = {});

/// Evaluates an already-trained pair under a variant's input transform.
EvalReport evaluate_variant(const TrainedPair& pair, const PreparedData& data, AblationVariant variant,
                            std::uint64_t seed);

}  // namespace lanecast
