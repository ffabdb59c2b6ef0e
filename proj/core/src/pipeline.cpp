#include "lanecast/pipeline.hpp"

#include <chrono>

#include "lanecast/dataset.hpp"
#include "lanecast/loss.hpp"
#include "lanecast/parallel.hpp"

namespace lanecast {

Classification classify(const Network<Real>& classifier, const Tensor3<Real>& input) {
  if (classifier.config().kind != ModuleKind::classifier) throw std::invalid_argument("classify: network is not a classifier");
  const auto logits = classifier.forward(input);
  const auto probs = softmax_rows<Real>(logits);
  Classification out;
  for (std::size_t step = 0; step < kPredictionSteps; ++step) {
    std::size_t best = 0;
    for (std::size_t c = 0; c < kManeuverClasses; ++c) {
      out.probabilities[step * kManeuverClasses + c] = probs[step * kManeuverClasses + c];
      if (probs[step * kManeuverClasses + c] > probs[step * kManeuverClasses + best]) best = c;
    }
    out.sequence[step] = static_cast<Maneuver>(best);
  }
  return out;
}

OffsetArray regress(const Network<Real>& regressor, const Tensor3<Real>& input, const ManeuverSequence& maneuvers) {
  if (regressor.config().kind != ModuleKind::regressor) throw std::invalid_argument("regress: network is not a regressor");
  std::vector<Real> out;
  if (regressor.config().maneuver_inputs() > 0) {
    const auto m = maneuver_inputs(maneuvers);
    out = regressor.forward(input, m);
  } else {
    out = regressor.forward(input);
  }
  OffsetArray offsets{};
  for (std::size_t i = 0; i < offsets.size(); ++i) offsets[i] = out[i];
  return offsets;
}

TrajectoryPrediction to_absolute(const OffsetArray& normalized, const Normalizer& normalizer, double origin_x,
                                 double origin_y) {
  TrajectoryPrediction p;
  p.offsets = denormalize_offsets(normalized, normalizer);
  for (std::size_t step = 0; step < kPredictionSteps; ++step) {
    p.positions[step] = {origin_x + p.offsets[2 * step], origin_y + p.offsets[2 * step + 1]};
  }
  return p;
}

Predictor::Predictor(StoredModel classifier, StoredModel regressor)
    : classifier_(std::move(classifier)), regressor_(std::move(regressor)) {
  if (classifier_.network.config().kind != ModuleKind::classifier) {
    throw std::invalid_argument("predictor: first model is not a classifier");
  }
  if (regressor_.network.config().kind != ModuleKind::regressor) {
    throw std::invalid_argument("predictor: second model is not a regressor");
  }
  if (classifier_.normalizer.hash() != regressor_.normalizer.hash()) {
    throw NormalizerMismatch("predictor: classifier and regressor were trained with different normalizers");
  }
}

Prediction Predictor::predict(const Tensor3<Real>& input, double origin_x, double origin_y) const {
  const auto start = std::chrono::steady_clock::now();
  Prediction p;
  p.classification = classify(classifier_.network, input);
  p.trajectory = to_absolute(regress(regressor_.network, input, p.classification.sequence), regressor_.normalizer,
                             origin_x, origin_y);
  p.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return p;
}

Prediction Predictor::predict(const NeighborhoodTensor& tensor) const {
  return predict(tensor.values, tensor.origin_x, tensor.origin_y);
}

std::vector<Prediction> Predictor::predict_batch(std::span<const NeighborhoodTensor> tensors, std::size_t workers) const {
  std::vector<Prediction> out(tensors.size());
  parallel_for(tensors.size(), [&](std::size_t i) { out[i] = predict(tensors[i]); }, workers);
  return out;
}

}  // namespace lanecast
