#include <gtest/gtest.h>

#include "lanecast/pipeline.hpp"
#include "test_support.hpp"

using namespace lanecast;

namespace {

StoredModel model(ModuleKind kind, std::uint64_t seed, const Normalizer& n = {}) {
  StoredModel m{Network<Real>(NetworkConfig{.kind = kind}), n};
  m.network.initialize(seed);
  return m;
}

Predictor predictor() { return Predictor(model(ModuleKind::classifier, 1), model(ModuleKind::regressor, 2)); }

}  // namespace

TEST(Pipeline, ProbabilityRowsSumToOne) {
  std::mt19937_64 rng(3);
  const auto p = predictor();
  for (int rep = 0; rep < 10; ++rep) {
    const auto in = lanecast::testing::random_tensor<Real>({4, 8, 30}, rng);
    const auto c = classify(p.classifier(), in);
    for (std::size_t s = 0; s < kPredictionSteps; ++s) {
      double sum = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_GE(c.probabilities[3 * s + k], 0.0);
        sum += c.probabilities[3 * s + k];
      }
      EXPECT_NEAR(sum, 1.0, 1e-6);
      const auto chosen = static_cast<std::size_t>(c.sequence[s]);
      for (std::size_t k = 0; k < 3; ++k) EXPECT_LE(c.probabilities[3 * s + k], c.probabilities[3 * s + chosen]);
    }
  }
}

TEST(Pipeline, TiesResolveToStraightThenLeft) {
  auto c = model(ModuleKind::classifier, 1);
  std::fill(c.network.parameters().begin(), c.network.parameters().end(), Real{0});
  const auto out = classify(c.network, Tensor3<Real>(4, 8, 30));
  for (auto m : out.sequence) EXPECT_EQ(m, Maneuver::straight);
  // raise left and right equally in step 0 through the output bias
  const auto& bias = c.network.layout().back();
  c.network.parameters()[bias.offset + 1] = 1.0f;
  c.network.parameters()[bias.offset + 2] = 1.0f;
  EXPECT_EQ(classify(c.network, Tensor3<Real>(4, 8, 30)).sequence[0], Maneuver::left);
}

TEST(Pipeline, PredictComposesClassifyAndRegress) {
  Normalizer n;
  n.output_mean = {50.0, 0.5};
  n.output_std = {30.0, 2.0};
  Predictor p(model(ModuleKind::classifier, 4, n), model(ModuleKind::regressor, 5, n));
  std::mt19937_64 rng(6);
  const auto in = lanecast::testing::random_tensor<Real>({4, 8, 30}, rng);
  const auto pred = p.predict(in, 100.0, -3.0);
  const auto c = classify(p.classifier(), in);
  EXPECT_EQ(pred.classification.sequence, c.sequence);
  const auto raw = denormalize_offsets(regress(p.regressor(), in, c.sequence), n);
  for (std::size_t s = 0; s < kPredictionSteps; ++s) {
    EXPECT_DOUBLE_EQ(pred.trajectory.positions[s][0], 100.0 + raw[2 * s]);
    EXPECT_DOUBLE_EQ(pred.trajectory.positions[s][1], -3.0 + raw[2 * s + 1]);
  }
  EXPECT_GE(pred.wall_ms, 0.0);
}

TEST(Pipeline, RegressorUsesManeuvers) {
  const auto r = model(ModuleKind::regressor, 7);
  std::mt19937_64 rng(8);
  const auto in = lanecast::testing::random_tensor<Real>({4, 8, 30}, rng);
  ManeuverSequence a{};
  a.fill(Maneuver::straight);
  ManeuverSequence b = a;
  b[2] = Maneuver::right;
  EXPECT_NE(regress(r.network, in, a), regress(r.network, in, b));
}

TEST(Pipeline, BatchMatchesSingle) {
  const auto p = predictor();
  std::mt19937_64 rng(9);
  std::vector<NeighborhoodTensor> tensors(12);
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    tensors[i].values = lanecast::testing::random_tensor<Real>({4, 8, 30}, rng);
    tensors[i].origin_x = static_cast<double>(i);
  }
  const auto batch = p.predict_batch(tensors, 4);
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto one = p.predict(tensors[i]);
    EXPECT_EQ(batch[i].classification.sequence, one.classification.sequence);
    EXPECT_EQ(batch[i].trajectory.positions, one.trajectory.positions);
  }
}

TEST(Pipeline, NormalizerMismatchRejected) {
  Normalizer other;
  other.input_std[0] = 2.0;
  EXPECT_THROW(Predictor(model(ModuleKind::classifier, 1), model(ModuleKind::regressor, 2, other)), NormalizerMismatch);
  EXPECT_THROW(Predictor(model(ModuleKind::regressor, 1), model(ModuleKind::regressor, 2)), std::invalid_argument);
  EXPECT_THROW(Predictor(model(ModuleKind::classifier, 1), model(ModuleKind::classifier, 2)), std::invalid_argument);
}
