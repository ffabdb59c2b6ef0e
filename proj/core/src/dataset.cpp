#include "lanecast/dataset.hpp"

#include <unordered_set>

#include "lanecast/parallel.hpp"

namespace lanecast {

namespace {

struct RawSample {
  NeighborhoodTensor tensor;
  OffsetArray offsets{};
  ManeuverSequence maneuvers{};
};

RawSample build_raw(const SceneIndex& index, const SampleWindow& w, const SlotRules& rules) {
  return {build_raw_tensor(w, index, rules), target_offsets(w, index), label_maneuvers(w, index)};
}

Sample finish(const SampleWindow& w, RawSample raw, const Normalizer& normalizer) {
  normalize_tensor(raw.tensor, normalizer);
  Sample s;
  s.window = w;
  s.input = std::move(raw.tensor.values);
  s.mask = raw.tensor.mask;
  s.maneuvers = raw.maneuvers;
  s.raw_offsets = raw.offsets;
  s.offsets = normalize_offsets(raw.offsets, normalizer);
  s.origin_x = raw.tensor.origin_x;
  s.origin_y = raw.tensor.origin_y;
  return s;
}

}  // namespace

std::array<Real, kPredictionSteps> maneuver_inputs(const ManeuverSequence& maneuvers) {
  std::array<Real, kPredictionSteps> out{};
  for (std::size_t i = 0; i < kPredictionSteps; ++i) out[i] = static_cast<Real>(static_cast<int>(maneuvers[i]));
  return out;
}

std::vector<Sample> build_samples(const SceneIndex& index, std::span<const SampleWindow> windows,
                                  const Normalizer& normalizer, const SlotRules& rules) {
  std::vector<Sample> out(windows.size());
  parallel_for(windows.size(), [&](std::size_t i) { out[i] = finish(windows[i], build_raw(index, windows[i], rules), normalizer); });
  return out;
}

PreparedData prepare_dataset(const SceneIndex& index, std::span<const SampleWindow> windows,
                             const VehicleSplit& split, const DatasetOptions& options) {
  const std::unordered_set<VehicleId> train_ids(split.train.begin(), split.train.end());
  const std::unordered_set<VehicleId> val_ids(split.val.begin(), split.val.end());
  const std::unordered_set<VehicleId> test_ids(split.test.begin(), split.test.end());

  std::vector<RawSample> raw(windows.size());
  parallel_for(windows.size(), [&](std::size_t i) { raw[i] = build_raw(index, windows[i], options.slots); });

  PreparedData data;
  if (options.normalize) {
    NormalizerFit fit;
    for (std::size_t i = 0; i < windows.size(); ++i) {
      if (!train_ids.contains(windows[i].target_id)) continue;
      fit.add(raw[i].tensor);
      fit.add(raw[i].offsets);
    }
    data.normalizer = fit.result();
  }
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const VehicleId id = windows[i].target_id;
    std::vector<Sample>* bucket = train_ids.contains(id) ? &data.train
                                  : val_ids.contains(id) ? &data.val
                                  : test_ids.contains(id) ? &data.test
                                                          : nullptr;
    if (bucket != nullptr) bucket->push_back(finish(windows[i], std::move(raw[i]), data.normalizer));
  }
  return data;
}

}  // namespace lanecast
