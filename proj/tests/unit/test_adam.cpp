#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "lanecast/adam.hpp"

using namespace lanecast;

TEST(Adam, Defaults) {
  AdamState<float> s(3);
  EXPECT_DOUBLE_EQ(s.learning_rate, 7e-5);
  EXPECT_DOUBLE_EQ(s.beta1, 0.9);
  EXPECT_DOUBLE_EQ(s.beta2, 0.999);
  EXPECT_DOUBLE_EQ(s.epsilon, 1e-8);
  EXPECT_EQ(s.step, 0u);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  std::vector<double> p{1.0, -2.0}, g{0.0, 0.0};
  AdamState<double> s(2, 0.1);
  adam_step<double>(p, g, s);
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0}));
  EXPECT_EQ(s.step, 1u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<double> p{0.0, 0.0}, g{3.0, -0.2};
  AdamState<double> s(2, 1e-3);
  adam_step<double>(p, g, s);
  EXPECT_NEAR(p[0], -1e-3, 1e-9);
  EXPECT_NEAR(p[1], 1e-3, 1e-9);
}

TEST(Adam, StepCountIncrements) {
  std::vector<double> p{0.0}, g{1.0};
  AdamState<double> s(1);
  for (int i = 1; i <= 5; ++i) {
    adam_step<double>(p, g, s);
    EXPECT_EQ(s.step, static_cast<std::uint64_t>(i));
  }
}

TEST(Adam, ConvergesOnQuadratic) {
  std::vector<double> w{1.0}, g{0.0};
  AdamState<double> s(1, 0.1);
  for (int i = 0; i < 100; ++i) {
    g[0] = 2.0 * w[0];
    adam_step<double>(w, g, s);
  }
  EXPECT_LT(std::abs(w[0]), 0.1);
}

TEST(Adam, NonFiniteGradientRejectedWithoutSideEffects) {
  std::vector<double> p{1.0, 1.0}, g{0.5, std::numeric_limits<double>::quiet_NaN()};
  AdamState<double> s(2, 0.1);
  EXPECT_THROW(adam_step<double>(p, g, s), TrainingDivergence);
  EXPECT_EQ(p, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(s.step, 0u);
  g[1] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(adam_step<double>(p, g, s), TrainingDivergence);
}

TEST(Adam, ShapeMismatchRejected) {
  std::vector<double> p{1.0, 1.0}, g{0.5};
  AdamState<double> s(2);
  EXPECT_THROW(adam_step<double>(p, g, s), ShapeError);
}
