#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "lanecast/loss.hpp"
#include "lanecast/model_io.hpp"
#include "lanecast/neighborhood.hpp"
#include "lanecast/network.hpp"

namespace lanecast {

using ProbabilityTable = std::array<double, kPredictionSteps * kManeuverClassCount>;

struct Classification {
  ProbabilityTable probabilities{};  // step-major: (step, straight/left/right)
  ManeuverSequence sequence{};
};

/// Softmax per step; argmax ties resolve toward straight, then left.
Classification classify(const Network<Real>& classifier, const Tensor3<Real>& input);

/// Normalized 5x2 offsets for the given maneuvers.
OffsetArray regress(const Network<Real>& regressor, const Tensor3<Real>& input, const ManeuverSequence& maneuvers);

/// Future positions at 1..5 s.
struct TrajectoryPrediction {
  OffsetArray offsets{};  // meters, relative to the t0 position
  std::array<std::array<double, 2>, kPredictionSteps> positions{};
};

TrajectoryPrediction to_absolute(const OffsetArray& normalized, const Normalizer& normalizer, double origin_x,
                                 double origin_y);

struct Prediction {
  Classification classification;
  TrajectoryPrediction trajectory;
  double wall_ms = 0.0;
};

class NormalizerMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Classify, then regress on the classified maneuvers.
class Predictor {
 public:
  Predictor(StoredModel classifier, StoredModel regressor);

  [[nodiscard]] Prediction predict(const NeighborhoodTensor& tensor) const;
  [[nodiscard]] Prediction predict(const Tensor3<Real>& input, double origin_x, double origin_y) const;
  [[nodiscard]] std::vector<Prediction> predict_batch(std::span<const NeighborhoodTensor> tensors,
                                                      std::size_t workers = 0) const;

  [[nodiscard]] const Network<Real>& classifier() const noexcept { return classifier_.network; }
  [[nodiscard]] const Network<Real>& regressor() const noexcept { return regressor_.network; }
  [[nodiscard]] const Normalizer& normalizer() const noexcept { return regressor_.normalizer; }

 private:
  StoredModel classifier_;
  StoredModel regressor_;
};

}  // namespace lanecast
