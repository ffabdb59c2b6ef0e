#include <gtest/gtest.h>

#include <random>

#include "lanecast/neighborhood.hpp"

using namespace lanecast;

namespace {

Scene scene_of(std::vector<TrajectoryRecord> recs) {
  Scene s;
  s.frame = recs.empty() ? 0 : recs.front().frame;
  std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.vehicle_id < b.vehicle_id; });
  s.records = std::move(recs);
  return s;
}

TrajectoryRecord at(VehicleId id, double x, int lane) { return {id, 0, x, (lane - 0.5) * 3.5, 25.0, 0.0, lane}; }

// Straight-line track of `frames` frames starting at frame 0.
void add_track(std::vector<TrajectoryRecord>& out, VehicleId id, double x0, double v, double a, int lane, int frames,
               const std::function<int(int)>& lane_at = {}) {
  for (int f = 0; f < frames; ++f) {
    const int l = lane_at ? lane_at(f) : lane;
    out.push_back({id, f, x0 + v * 0.1 * f, (l - 0.5) * 3.5, v, a, l});
  }
}

}  // namespace

TEST(Slots, ReferenceLayout) {
  // target in lane 2; one vehicle per slot
  auto s = scene_of({at(1, 0, 2), at(2, 30, 2), at(3, 40, 3), at(4, 3, 3), at(5, -40, 3), at(6, 35, 1), at(7, -2, 1),
                     at(8, -30, 1)});
  const auto a = assign_slots(s, 1);
  EXPECT_EQ(a[NeighborSlot::T], 1);
  EXPECT_EQ(a[NeighborSlot::F], 2);
  EXPECT_EQ(a[NeighborSlot::FL], 3);
  EXPECT_EQ(a[NeighborSlot::L], 4);
  EXPECT_EQ(a[NeighborSlot::RL], 5);
  EXPECT_EQ(a[NeighborSlot::FR], 6);
  EXPECT_EQ(a[NeighborSlot::R], 7);
  EXPECT_EQ(a[NeighborSlot::RR], 8);
}

TEST(Slots, TargetAlone) {
  const auto a = assign_slots(scene_of({at(4, 10, 1)}), 4);
  EXPECT_EQ(a[NeighborSlot::T], 4);
  for (std::size_t s = 1; s < kSlots; ++s) EXPECT_FALSE(a.vehicles[s].has_value());
}

TEST(Slots, SameLaneBehindAndFarLanesIgnored) {
  const auto a = assign_slots(scene_of({at(1, 0, 2), at(2, -10, 2), at(3, 5, 4)}), 1);
  for (std::size_t s = 1; s < kSlots; ++s) EXPECT_FALSE(a.vehicles[s].has_value());
}

TEST(Slots, SideSlotFallsBackToFrontRear) {
  // beyond the side gate, an adjacent vehicle alongside belongs to the front slot
  const auto a = assign_slots(scene_of({at(1, 0, 2), at(2, 16, 3)}), 1);
  EXPECT_FALSE(a.occupied(NeighborSlot::L));
  EXPECT_EQ(a[NeighborSlot::FL], 2);
}

TEST(Slots, MissingTargetRejected) {
  EXPECT_THROW(assign_slots(scene_of({at(1, 0, 2)}), 9), std::invalid_argument);
  EXPECT_THROW(assign_slots(scene_of({at(1, 0, 0)}), 1), std::invalid_argument);
}

TEST(Slots, MirrorSymmetry) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xs(-60, 60);
  std::uniform_int_distribution<int> lanes(1, 4);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<TrajectoryRecord> left, right;
    for (VehicleId id = 1; id <= 10; ++id) {
      const double x = id == 1 ? 0.0 : xs(rng);
      const int l = id == 1 ? 2 + rep % 2 : lanes(rng);
      left.push_back(at(id, x, l));
      auto m = at(id, x, 5 - l);
      m.y = -left.back().y;
      right.push_back(m);
    }
    const auto a = assign_slots(scene_of(left), 1);
    const auto b = assign_slots(scene_of(right), 1);
    for (std::size_t s = 0; s < kSlots; ++s) {
      EXPECT_EQ(a.vehicles[s], b[mirrored(static_cast<NeighborSlot>(s))]) << to_string(static_cast<NeighborSlot>(s));
    }
  }
}

TEST(Tensor, HandComputedScene) {
  std::vector<TrajectoryRecord> recs;
  add_track(recs, 1, 100.0, 20.0, 0.0, 2, 30);
  add_track(recs, 2, 130.0, 20.0, 0.5, 2, 30);
  add_track(recs, 3, 95.0, 22.0, -1.0, 3, 30);
  SceneIndex idx(recs);
  const auto t = build_raw_tensor({1, 29}, idx);
  EXPECT_EQ(t.values.shape(), (Shape3{4, 8, 30}));
  EXPECT_DOUBLE_EQ(t.origin_x, 158.0);
  EXPECT_DOUBLE_EQ(t.origin_y, 5.25);
  EXPECT_EQ(t.slots[NeighborSlot::F], 2);
  EXPECT_EQ(t.slots[NeighborSlot::L], 3);
  const std::size_t T = 0, F = 1, L = 3;
  // target at t0 is the origin
  EXPECT_FLOAT_EQ(t.values(0, T, 29), 0.0f);
  EXPECT_FLOAT_EQ(t.values(1, T, 29), 0.0f);
  EXPECT_FLOAT_EQ(t.values(2, T, 29), 20.0f);
  // oldest column is 2.9 s earlier
  EXPECT_FLOAT_EQ(t.values(0, T, 0), -58.0f);
  EXPECT_FLOAT_EQ(t.values(0, F, 29), 30.0f);
  EXPECT_FLOAT_EQ(t.values(3, F, 10), 0.5f);
  EXPECT_NEAR(t.values(0, L, 29), 95.0 + 2.2 * 29 - 158.0, 1e-4);
  EXPECT_FLOAT_EQ(t.values(1, L, 0), 3.5f);
  EXPECT_FLOAT_EQ(t.values(3, L, 5), -1.0f);
  EXPECT_TRUE(t.mask[T] && t.mask[F] && t.mask[L]);
  EXPECT_EQ(std::count(t.mask.begin(), t.mask.end(), true), 3);
}

TEST(Tensor, AbsentRowsAreZeroEvenAfterNormalizing) {
  std::vector<TrajectoryRecord> recs;
  add_track(recs, 1, 0.0, 20.0, 0.1, 2, 30);
  add_track(recs, 2, 10.0, 25.0, 0.0, 1, 30);
  // vehicle 3 only appears for the last 10 history frames
  for (int f = 20; f < 30; ++f) recs.push_back({3, f, 30.0 + f, 8.75, 10.0, 0.0, 3});
  SceneIndex idx(recs);
  Normalizer n;
  n.input_mean = {3.0, -2.0, 20.0, 0.5};
  n.input_std = {10.0, 2.0, 4.0, 1.0};
  const auto t = build_tensor({1, 29}, idx, n);
  for (std::size_t s = 0; s < kSlots; ++s) {
    for (std::size_t k = 0; k < 30; ++k) {
      const bool any = t.values(0, s, k) != 0 || t.values(1, s, k) != 0 || t.values(2, s, k) != 0 ||
                       t.values(3, s, k) != 0;
      EXPECT_EQ(any, t.present[s][k]) << "slot " << s << " col " << k;
      if (!t.mask[s]) {
        EXPECT_FALSE(t.present[s][k]);
      }
    }
  }
  const std::size_t L = 3;
  EXPECT_TRUE(t.mask[L]);
  EXPECT_FALSE(t.present[L][19]);
  EXPECT_TRUE(t.present[L][20]);
  EXPECT_FLOAT_EQ(t.values(2, 0, 29), (20.0f - 20.0f) / 4.0f + 0.0f);
  EXPECT_FLOAT_EQ(t.values(3, 0, 29), (0.1f - 0.5f) / 1.0f);
}

TEST(Tensor, MissingTargetHistoryRejected) {
  std::vector<TrajectoryRecord> recs;
  add_track(recs, 1, 0.0, 20.0, 0.0, 2, 30);
  SceneIndex idx(recs);
  EXPECT_THROW(build_raw_tensor({1, 30}, idx), std::invalid_argument);
  EXPECT_THROW(build_raw_tensor({1, 28}, idx), std::invalid_argument);
}

TEST(Labels, LeftCrossingMidHorizon) {
  std::vector<int> lanes(80, 2);
  for (std::size_t i = 29 + 25; i < lanes.size(); ++i) lanes[i] = 3;
  const auto m = label_maneuvers(lanes, 29);
  const ManeuverSequence expect{Maneuver::left, Maneuver::left, Maneuver::left, Maneuver::left, Maneuver::straight};
  EXPECT_EQ(m, expect);
}

TEST(Labels, EarlyRightCrossing) {
  std::vector<int> lanes(80, 3);
  for (std::size_t i = 29 + 5; i < lanes.size(); ++i) lanes[i] = 2;
  const ManeuverSequence expect{Maneuver::right, Maneuver::right, Maneuver::straight, Maneuver::straight,
                                Maneuver::straight};
  EXPECT_EQ(label_maneuvers(lanes, 29), expect);
}

TEST(Labels, PastCrossingStillCountsWithinWindow) {
  std::vector<int> lanes(80, 1);
  for (std::size_t i = 19; i < lanes.size(); ++i) lanes[i] = 2;  // crossed 1 s before t0
  const auto m = label_maneuvers(lanes, 29);
  EXPECT_EQ(m[0], Maneuver::left);
  EXPECT_EQ(m[1], Maneuver::straight);
}

TEST(Labels, NoCrossingIsStraight) {
  std::vector<int> lanes(80, 2);
  for (auto m : label_maneuvers(lanes, 29)) EXPECT_EQ(m, Maneuver::straight);
}

TEST(Labels, UnknownLaneRejected) {
  std::vector<int> lanes(80, 2);
  lanes[50] = 0;
  EXPECT_THROW(label_maneuvers(lanes, 29), std::invalid_argument);
  EXPECT_THROW(label_maneuvers(lanes, 80), std::out_of_range);
}

TEST(Labels, FromSceneIndex) {
  std::vector<TrajectoryRecord> recs;
  add_track(recs, 1, 0.0, 20.0, 0.0, 2, 100, [](int f) { return f >= 54 ? 3 : 2; });
  SceneIndex idx(recs);
  const ManeuverSequence expect{Maneuver::left, Maneuver::left, Maneuver::left, Maneuver::left, Maneuver::straight};
  EXPECT_EQ(label_maneuvers(SampleWindow{1, 29}, idx), expect);
  EXPECT_THROW(label_maneuvers(SampleWindow{1, 60}, idx), std::invalid_argument);
}

TEST(Offsets, ConstantSpeed) {
  std::vector<TrajectoryRecord> recs;
  add_track(recs, 1, 7.0, 20.0, 0.0, 2, 80);
  SceneIndex idx(recs);
  const auto o = target_offsets({1, 29}, idx);
  for (std::size_t s = 0; s < kPredictionSteps; ++s) {
    EXPECT_NEAR(o[2 * s], 20.0 * static_cast<double>(s + 1), 1e-9);
    EXPECT_EQ(o[2 * s + 1], 0.0);
  }
  EXPECT_THROW(target_offsets({1, 30}, idx), std::invalid_argument);
}

TEST(Offsets, NormalizeRoundTrip) {
  Normalizer n;
  n.output_mean = {50.0, 0.2};
  n.output_std = {30.0, 1.5};
  OffsetArray raw{20, 0.1, 40, 0.5, 60, 1.2, 80, 2.9, 100, 3.4};
  const auto back = denormalize_offsets(normalize_offsets(raw, n), n);
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_NEAR(back[i], raw[i], 1e-12);
  EXPECT_NEAR(normalize_offsets(raw, n)[0], -1.0, 1e-12);
}

TEST(NormalizerFit, StatisticsOfKnownValues) {
  NormalizerFit fit;
  fit.add(OffsetArray{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  const auto n = fit.result();
  EXPECT_DOUBLE_EQ(n.output_mean[0], 5.0);
  EXPECT_DOUBLE_EQ(n.output_mean[1], 6.0);
  EXPECT_NEAR(n.output_std[0], std::sqrt(8.0), 1e-12);
  // no tensors were added: input stays identity
  EXPECT_EQ(n.input_std, (std::array<double, 4>{1, 1, 1, 1}));
  EXPECT_NE(n.hash(), Normalizer::identity().hash());
}
