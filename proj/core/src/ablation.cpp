#include "lanecast/ablation.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "lanecast/parallel.hpp"

namespace lanecast {

namespace {

constexpr std::array kVariants{
    AblationVariant::full,
    AblationVariant::only_xy_channels,
    AblationVariant::without_neighborhood,
    AblationVariant::shuffled_neighborhood,
    AblationVariant::without_dilation,
    AblationVariant::without_maneuver,
    AblationVariant::sampled_maneuver,
};

}  // namespace

std::string_view to_string(AblationVariant variant) noexcept {
  switch (variant) {
    case AblationVariant::full: return "full";
    case AblationVariant::only_xy_channels: return "only_xy_channels";
    case AblationVariant::without_neighborhood: return "without_neighborhood";
    case AblationVariant::shuffled_neighborhood: return "shuffled_neighborhood";
    case AblationVariant::without_dilation: return "without_dilation";
    case AblationVariant::without_maneuver: return "without_maneuver";
    case AblationVariant::sampled_maneuver: return "sampled_maneuver";
  }
  return "?";
}

AblationVariant parse_variant(std::string_view name) {
  for (auto v : kVariants) {
    if (to_string(v) == name) return v;
  }
  throw std::invalid_argument("unknown ablation variant '" + std::string(name) + "'");
}

std::span<const AblationVariant> all_variants() noexcept { return kVariants; }

std::string VariantProfile::fingerprint() const {
  return "channels=" + std::to_string(input_channels) + ";neighbors=" + (neighbors ? "1" : "0") +
         ";shuffled=" + (shuffled_rows ? "1" : "0") + ";dilated=" + (dilated ? "1" : "0") +
         ";maneuver_input=" + (maneuver_input ? "1" : "0") + ";sampled=" + (sampled_maneuvers ? "1" : "0");
}

int VariantProfile::differences(const VariantProfile& o) const noexcept {
  return (input_channels != o.input_channels) + (neighbors != o.neighbors) + (shuffled_rows != o.shuffled_rows) +
         (dilated != o.dilated) + (maneuver_input != o.maneuver_input) + (sampled_maneuvers != o.sampled_maneuvers);
}

VariantProfile profile_of(AblationVariant variant) noexcept {
  VariantProfile p;
  switch (variant) {
    case AblationVariant::full: break;
    case AblationVariant::only_xy_channels: p.input_channels = 2; break;
    case AblationVariant::without_neighborhood: p.neighbors = false; break;
    case AblationVariant::shuffled_neighborhood: p.shuffled_rows = true; break;
    case AblationVariant::without_dilation: p.dilated = false; break;
    case AblationVariant::without_maneuver: p.maneuver_input = false; break;
    case AblationVariant::sampled_maneuver: p.sampled_maneuvers = true; break;
  }
  return p;
}

NetworkConfig network_config(ModuleKind kind, const VariantProfile& profile) {
  NetworkConfig c;
  c.kind = kind;
  c.input_channels = profile.input_channels;
  c.dilated = profile.dilated;
  c.maneuver_input = profile.maneuver_input;
  return c;
}

RowPermutation row_permutation(std::uint64_t seed) {
  RowPermutation p{};
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  const RowPermutation identity = p;
  while (p == identity) {
    for (std::size_t i = p.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> d(0, i - 1);
      std::swap(p[i - 1], p[d(rng)]);
    }
  }
  return p;
}

Tensor3<Real> apply_profile(const Tensor3<Real>& input, const VariantProfile& profile, const RowPermutation& rows) {
  const auto& s = input.shape();
  if (profile.input_channels > s.channels) throw ShapeError("ablation: more channels requested than present");
  Tensor3<Real> out(profile.input_channels, s.rows, s.cols);
  for (std::size_t c = 0; c < profile.input_channels; ++c) {
    for (std::size_t r = 0; r < s.rows; ++r) {
      const std::size_t src = profile.shuffled_rows ? rows[r] : r;
      if (!profile.neighbors && src != static_cast<std::size_t>(NeighborSlot::T)) continue;
      for (std::size_t k = 0; k < s.cols; ++k) out(c, r, k) = input(c, src, k);
    }
  }
  return out;
}

std::vector<Sample> apply_profile(std::span<const Sample> samples, const VariantProfile& profile,
                                  const RowPermutation& rows) {
  std::vector<Sample> out(samples.begin(), samples.end());
  for (auto& s : out) s.input = apply_profile(s.input, profile, rows);
  return out;
}

SequenceSampler::SequenceSampler(std::span<const Sample> training) {
  if (training.empty()) throw std::invalid_argument("sequence sampler: no training labels");
  pool_.reserve(training.size());
  for (const auto& s : training) pool_.push_back(s.maneuvers);
}

std::vector<ManeuverSequence> SequenceSampler::draw(std::size_t count, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
  std::vector<ManeuverSequence> out(count);
  for (auto& m : out) m = pool_[pick(rng)];
  return out;
}

TrainedPair train_pair(const PreparedData& data, const TrainConfig& config, const VariantProfile& profile,
                       const EpochCallback& on_classifier_epoch, const EpochCallback& on_regressor_epoch) {
  TrainConfig regressor_config = config;
  regressor_config.seed = config.seed + 1;
  auto classifier = train_classifier(data.train, data.val, config, network_config(ModuleKind::classifier, profile),
                                     on_classifier_epoch);
  auto regressor = train_regressor(data.train, data.val, regressor_config,
                                   network_config(ModuleKind::regressor, profile), on_regressor_epoch);
  return {std::move(classifier), std::move(regressor)};
}

EvalReport evaluate_variant(const TrainedPair& pair, const PreparedData& data, AblationVariant variant,
                            std::uint64_t seed) {
  const auto profile = profile_of(variant);
  const auto rows = row_permutation(seed);
  const auto test = apply_profile(data.test, profile, rows);
  const Predictor predictor(StoredModel{pair.classifier.network, data.normalizer},
                            StoredModel{pair.regressor.network, data.normalizer});
  const std::string fingerprint = "variant=" + std::string(to_string(variant)) + ";" + profile.fingerprint();
  if (!profile.sampled_maneuvers) return evaluate(predictor, test, fingerprint);

  const auto drawn = SequenceSampler(data.train).draw(test.size(), seed);
  std::vector<SamplePrediction> predictions(test.size());
  parallel_for(test.size(), [&](std::size_t i) {
    const auto offsets = regress(predictor.regressor(), test[i].input, drawn[i]);
    predictions[i].maneuvers = drawn[i];
    predictions[i].positions = to_absolute(offsets, data.normalizer, test[i].origin_x, test[i].origin_y).positions;
  });
  return score(predictions, test, fingerprint);
}

AblationResult run_ablation(AblationVariant variant, const PreparedData& data, const TrainConfig& config,
                            std::uint64_t seed, const EpochCallback& on_epoch) {
  if (data.test.empty()) throw std::invalid_argument("ablation: empty test split");
  AblationResult result;
  result.variant = variant;
  result.profile = profile_of(variant);
  const auto rows = row_permutation(seed);
  PreparedData transformed;
  transformed.normalizer = data.normalizer;
  transformed.train = apply_profile(data.train, result.profile, rows);
  transformed.val = apply_profile(data.val, result.profile, rows);
  const auto pair = train_pair(transformed, config, result.profile, on_epoch, on_epoch);
  result.parameter_count = pair.classifier.network.parameter_count() + pair.regressor.network.parameter_count();
  result.report = evaluate_variant(pair, data, variant, seed);
  return result;
}

}  // namespace lanecast
