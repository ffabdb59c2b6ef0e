#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "lanecast/pipeline.hpp"
#include "lanecast/synth.hpp"
#include "lanecast/training.hpp"
#include "test_support.hpp"

using namespace lanecast;

namespace {

const PreparedData& data() {
  static const PreparedData d = lanecast::testing::small_dataset(300, 21);
  return d;
}

double regression_rmse_m(const Network<Real>& net, std::span<const Sample> samples, const Normalizer& n) {
  double sq = 0.0;
  for (const auto& s : samples) {
    const auto pred = denormalize_offsets(regress(net, s.input, s.maneuvers), n);
    for (std::size_t i = 0; i < pred.size(); ++i) sq += (pred[i] - s.raw_offsets[i]) * (pred[i] - s.raw_offsets[i]);
  }
  return std::sqrt(sq / static_cast<double>(samples.size() * kPredictionSteps));
}

}  // namespace

TEST(Training, DatasetSplitsByVehicle) {
  const auto& d = data();
  EXPECT_EQ(d.train.size() + d.val.size() + d.test.size(), 300u);
  EXPECT_EQ(d.train.size(), 210u);
  for (const auto& s : d.train) EXPECT_EQ(s.input.shape(), (Shape3{4, 8, 30}));
}

TEST(Training, ShortRunLowersBothLosses) {
  const auto& d = data();
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 50;
  cfg.batch_size = 32;
  cfg.seed = 3;
  const auto c = train_classifier(d.train, d.val, cfg);
  EXPECT_LT(c.curve.back().train_loss, 0.5 * c.initial_train_loss);
  EXPECT_NEAR(c.initial_train_loss, 5.0 * std::log(3.0), 1.5);
  const auto r = train_regressor(d.train, d.val, cfg);
  EXPECT_LT(r.curve.back().train_loss, 0.5 * r.initial_train_loss);
  EXPECT_EQ(r.curve.size(), 50u);
  EXPECT_GE(r.best_epoch, 1u);
  EXPECT_DOUBLE_EQ(regression_loss(r.network, d.val), r.best_val_loss);
}

TEST(Training, DeterministicUnderSeed) {
  const auto& d = data();
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.seed = 9;
  cfg.workers = 1;
  const auto a = train_classifier(d.train, d.val, cfg);
  const auto b = train_classifier(d.train, d.val, cfg);
  EXPECT_TRUE(std::equal(a.network.parameters().begin(), a.network.parameters().end(), b.network.parameters().begin()));
  cfg.workers = 3;  // reduction order does not depend on the thread count
  const auto c = train_classifier(d.train, d.val, cfg);
  EXPECT_TRUE(std::equal(a.network.parameters().begin(), a.network.parameters().end(), c.network.parameters().begin()));
  cfg.seed = 10;
  const auto e = train_classifier(d.train, d.val, cfg);
  EXPECT_FALSE(std::equal(a.network.parameters().begin(), a.network.parameters().end(), e.network.parameters().begin()));
}

TEST(Training, OverfitsTenSamples) {
  const auto& d = data();
  std::vector<Sample> ten(d.train.begin(), d.train.begin() + 10);
  TrainConfig cfg;
  cfg.learning_rate = 2e-3;
  cfg.epochs = 2000;  // one batch of 10 per epoch, so 2,000 steps
  cfg.batch_size = 10;
  cfg.seed = 1;
  cfg.final_lr_scale = 0.01;
  const auto c = train_classifier(ten, {}, cfg);
  EXPECT_LT(classification_loss(c.network, ten), 0.05);
  const auto r = train_regressor(ten, {}, cfg);
  EXPECT_LT(regression_rmse_m(r.network, ten, d.normalizer), 0.05);
}

TEST(Training, NonFiniteInputRaisesDivergence) {
  auto bad = std::vector<Sample>(data().train.begin(), data().train.begin() + 4);
  bad[2].input(0, 0, 0) = std::numeric_limits<Real>::quiet_NaN();
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  try {
    train_classifier(bad, {}, cfg);
    FAIL() << "expected divergence";
  } catch (const TrainingDivergence& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos);
  }
}

TEST(Training, InvalidConfigRejected) {
  const auto& d = data();
  TrainConfig cfg;
  cfg.batch_size = 0;
  EXPECT_THROW(train_classifier(d.train, d.val, cfg), std::invalid_argument);
  cfg = {};
  cfg.final_lr_scale = 0.0;
  EXPECT_THROW(train_regressor(d.train, d.val, cfg), std::invalid_argument);
  EXPECT_THROW(train_classifier({}, d.val, TrainConfig{}), std::invalid_argument);
}

TEST(Training, PatienceStopsEarly) {
  const auto& d = data();
  TrainConfig cfg;
  cfg.learning_rate = 1e-12;  // nothing improves after the first epoch
  cfg.epochs = 40;
  cfg.batch_size = 64;
  cfg.patience = 3;
  const auto r = train_classifier(d.train, d.val, cfg);
  EXPECT_LT(r.curve.size(), 40u);
}

TEST(Training, RegressorLossFallsEveryEarlyEpochAtDefaultRate) {
  const auto& d = data();
  TrainConfig cfg;  // lr 7e-5, batch 128
  cfg.epochs = 10;
  cfg.seed = 4;
  const auto r = train_regressor(d.train, d.val, cfg);
  ASSERT_EQ(r.curve.size(), 10u);
  EXPECT_LT(r.curve.front().train_loss, r.initial_train_loss);
  for (std::size_t e = 1; e < r.curve.size(); ++e) EXPECT_LT(r.curve[e].train_loss, r.curve[e - 1].train_loss) << e;
}

TEST(Training, ConstantVelocitySceneGeneralizes) {
  // noise-free cruising: every vehicle keeps its lane and speed, so lateral
  // targets are exactly zero and the 5 s offset is five times the speed
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> speed(20.0, 32.0), gap(25.0, 60.0);
  std::vector<TrajectoryRecord> records;
  std::vector<SampleWindow> windows;
  std::vector<VehicleId> ids;
  for (int k = 0; k < 240; ++k) {
    ScenarioSpec s;
    s.first_frame = static_cast<FrameIndex>(k) * 200;
    const VehicleId base = static_cast<VehicleId>(k) * 10;
    const double v = speed(rng);
    s.vehicles.push_back({base + 1, 100.0, 2, v, 0.0, std::nullopt, std::nullopt});
    s.vehicles.push_back({base + 2, 100.0 + gap(rng), 2, v + 1.0, 0.0, std::nullopt, std::nullopt});
    s.vehicles.push_back({base + 3, 100.0 - gap(rng), 3, v - 0.5, 0.0, std::nullopt, std::nullopt});
    const auto recs = generate(s, static_cast<std::uint64_t>(k));
    records.insert(records.end(), recs.begin(), recs.end());
    windows.push_back({base + 1, s.first_frame + 29});
    ids.push_back(base + 1);
  }
  SceneIndex index(records);
  const auto d = prepare_dataset(index, windows, split_by_vehicle(ids, {0.7, 0.1, 0.2}, 3));
  TrainConfig cfg;
  cfg.learning_rate = 2e-3;
  cfg.epochs = 150;
  cfg.batch_size = 32;
  cfg.final_lr_scale = 0.01;
  cfg.seed = 5;
  const auto r = train_regressor(d.train, d.val, cfg);
  double sq = 0.0;
  for (const auto& s : d.test) {
    const auto pred = denormalize_offsets(regress(r.network, s.input, s.maneuvers), d.normalizer);
    const std::size_t last = 2 * (kPredictionSteps - 1);
    sq += std::pow(pred[last] - s.raw_offsets[last], 2) + std::pow(pred[last + 1] - s.raw_offsets[last + 1], 2);
  }
  const double rmse_5s = std::sqrt(sq / static_cast<double>(d.test.size()));
  EXPECT_LT(rmse_5s, 1.0);
}
