#include <gtest/gtest.h>

#include <set>

#include "lanecast/corpus.hpp"
#include "lanecast/synth.hpp"

using namespace lanecast;

namespace {

ScenarioSpec changer(double start = 3.0) {
  ScenarioSpec s;
  s.vehicles.push_back({1, 50.0, 1, 25.0, 0.2, LaneChangeCommand{Maneuver::left, start, 4.0}, std::nullopt});
  s.vehicles.push_back({2, 90.0, 1, 24.0, 0.0, std::nullopt, std::nullopt});
  s.vehicles.push_back({3, 45.0, 2, 27.0, 0.0, std::nullopt, std::nullopt});
  s.vehicles.push_back({4, 40.0, 3, 26.0, 0.0, std::nullopt, SpeedCommand{2.0, 3.0, -1.5}});
  return s;
}

std::vector<TrajectoryRecord> track_of(const std::vector<TrajectoryRecord>& recs, VehicleId id) {
  std::vector<TrajectoryRecord> out;
  for (const auto& r : recs)
    if (r.vehicle_id == id) out.push_back(r);
  return out;
}

}  // namespace

TEST(Synth, ProfileEndpoints) {
  EXPECT_EQ(lane_change_profile(0.0), 0.0);
  EXPECT_EQ(lane_change_profile(1.0), 1.0);
  EXPECT_DOUBLE_EQ(lane_change_profile(0.5), 0.5);
  EXPECT_EQ(lane_change_profile(-1.0), 0.0);
  EXPECT_EQ(lane_change_profile(2.0), 1.0);
  for (double s = 0.0; s < 1.0; s += 0.05) EXPECT_LE(lane_change_profile(s), lane_change_profile(s + 0.05));
}

TEST(Synth, OneHundredFramesPerVehicle) {
  auto spec = changer();
  spec.first_frame = 400;
  const auto recs = generate(spec, 1);
  EXPECT_EQ(recs.size(), 400u);
  const auto t = track_of(recs, 2);
  ASSERT_EQ(t.size(), 100u);
  EXPECT_EQ(t.front().frame, 400);
  EXPECT_EQ(t.back().frame, 499);
  EXPECT_TRUE(std::is_sorted(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
    return a.vehicle_id != b.vehicle_id ? a.vehicle_id < b.vehicle_id : a.frame < b.frame;
  }));
}

TEST(Synth, LaneChangesOnceAtLateralMidpoint) {
  const auto t = track_of(generate(changer(3.0), 1), 1);
  int switches = 0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i].lane_id != t[i - 1].lane_id) {
      ++switches;
      EXPECT_EQ(t[i].frame, 50);
      EXPECT_EQ(t[i].lane_id, 2);
    }
  }
  EXPECT_EQ(switches, 1);
  EXPECT_DOUBLE_EQ(t[29].y, lane_center(1, 3.5));
  EXPECT_NEAR(t[50].y, 0.5 * (lane_center(1, 3.5) + lane_center(2, 3.5)), 1e-12);
  EXPECT_NEAR(t[70].y, lane_center(2, 3.5), 1e-12);
  EXPECT_DOUBLE_EQ(lane_center(2, 3.5), 5.25);
}

TEST(Synth, SpeedMatchesPositionDifferences) {
  const auto recs = generate(changer(), 1);
  for (VehicleId id : {1, 2, 4}) {
    const auto t = track_of(recs, id);
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
      // constant-acceleration pieces are quadratic, so the central difference is exact there
      if (id == 4 && ((i >= 19 && i <= 21) || (i >= 49 && i <= 51))) continue;
      EXPECT_NEAR((t[i + 1].x - t[i - 1].x) / 0.2, t[i].v, 1e-9) << "vehicle " << id << " frame " << i;
    }
  }
  const auto four = track_of(recs, 4);
  EXPECT_DOUBLE_EQ(four[30].a, -1.5);
  EXPECT_DOUBLE_EQ(four[60].a, 0.0);
  EXPECT_NEAR(four[60].v, 26.0 - 4.5, 1e-12);
}

TEST(Synth, LongitudinalKinematics) {
  VehicleScript s{1, 10.0, 1, 20.0, 0.5, std::nullopt, SpeedCommand{1.0, 2.0, -2.0}};
  EXPECT_NEAR(longitudinal_at(s, 1.0).x, 10.0 + 20.0 + 0.25, 1e-12);
  const auto at3 = longitudinal_at(s, 3.0);
  EXPECT_NEAR(at3.v, 20.5 - 4.0, 1e-12);
  EXPECT_NEAR(at3.x, 30.25 + 20.5 * 2 - 4.0, 1e-12);
  EXPECT_DOUBLE_EQ(at3.a, 0.5);
}

TEST(Synth, LabelsAgreeWithScript) {
  const auto recs = generate(changer(3.0), 1);
  SceneIndex idx(recs);
  // crossing at 5.0 s is 2.1 s after t0 = 2.9 s
  const ManeuverSequence expect{Maneuver::left, Maneuver::left, Maneuver::left, Maneuver::left, Maneuver::straight};
  EXPECT_EQ(label_maneuvers(SampleWindow{1, 29}, idx), expect);
  for (auto m : label_maneuvers(SampleWindow{2, 29}, idx)) EXPECT_EQ(m, Maneuver::straight);
}

TEST(Synth, NoiseIsSeededAndLeavesKinematics) {
  auto spec = changer();
  spec.noise = 0.05;
  const auto a = generate(spec, 7);
  const auto b = generate(spec, 7);
  const auto c = generate(spec, 8);
  const auto clean = generate(changer(), 7);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].v, clean[i].v);
    EXPECT_EQ(a[i].a, clean[i].a);
    EXPECT_EQ(a[i].lane_id, clean[i].lane_id);
    sq += (a[i].x - clean[i].x) * (a[i].x - clean[i].x);
  }
  EXPECT_NEAR(std::sqrt(sq / static_cast<double>(a.size())), 0.05, 0.01);
}

TEST(Synth, InvalidScenariosRejected) {
  auto s = changer();
  s.vehicles[1].id = 1;
  EXPECT_THROW(generate(s, 1), ScenarioError);
  s = changer();
  s.vehicles[0].lane = 3;  // left change out of a 3-lane road
  EXPECT_THROW(generate(s, 1), ScenarioError);
  s = changer();
  s.vehicles[2].lane = 0;
  EXPECT_THROW(generate(s, 1), ScenarioError);
  s = changer();
  s.duration = 5.0;
  EXPECT_THROW(generate(s, 1), ScenarioError);
  s = changer();
  s.vehicles[3].speed_change->accel = -20.0;
  EXPECT_THROW(generate(s, 1), ScenarioError);
}

TEST(Synth, EditSceneRemovesExactlyOneVehicle) {
  const auto recs = generate(changer(), 1);
  const auto edited = edit_scene(recs, 3);
  EXPECT_EQ(edited.size(), 300u);
  for (const auto& r : edited) EXPECT_NE(r.vehicle_id, 3);
  EXPECT_THROW(edit_scene(recs, 99), std::invalid_argument);
}

TEST(Synth, EditingOneSideLeavesOtherSlots) {
  ScenarioSpec s;
  s.vehicles.push_back({1, 100.0, 2, 25.0, 0.0, std::nullopt, std::nullopt});
  s.vehicles.push_back({2, 140.0, 2, 25.0, 0.0, std::nullopt, std::nullopt});  // F
  s.vehicles.push_back({3, 102.0, 3, 25.0, 0.0, std::nullopt, std::nullopt});  // L
  s.vehicles.push_back({4, 130.0, 3, 25.0, 0.0, std::nullopt, std::nullopt});  // FL
  s.vehicles.push_back({5, 98.0, 1, 25.0, 0.0, std::nullopt, std::nullopt});   // R
  s.vehicles.push_back({6, 70.0, 1, 25.0, 0.0, std::nullopt, std::nullopt});   // RR
  const auto recs = generate(s, 1);
  const auto before = assign_slots(*SceneIndex(recs).scene(29), 1);
  SceneIndex after_idx(edit_scene(recs, 3));
  const auto after = assign_slots(*after_idx.scene(29), 1);
  for (auto slot : {NeighborSlot::T, NeighborSlot::F, NeighborSlot::FR, NeighborSlot::R, NeighborSlot::RR})
    EXPECT_EQ(before[slot], after[slot]) << to_string(slot);
  EXPECT_EQ(before[NeighborSlot::L], 3);
  EXPECT_FALSE(after.occupied(NeighborSlot::L));
  EXPECT_EQ(after[NeighborSlot::FL], 4);
}

TEST(Corpus, PlanHonoursShares) {
  CorpusSpec spec;
  spec.windows = 500;
  const auto plan = plan_corpus(spec, 3);
  ASSERT_EQ(plan.size(), 500u);
  std::array<int, 4> counts{};
  std::set<VehicleId> targets;
  for (const auto& c : plan) {
    ++counts[static_cast<std::size_t>(c.family)];
    EXPECT_TRUE(targets.insert(c.window.target_id).second);
    EXPECT_EQ(c.window.t0_frame, c.spec.first_frame + kScenarioT0);
  }
  EXPECT_EQ(counts[0], 200);
  EXPECT_EQ(counts[1], 200);
  EXPECT_EQ(counts[2] + counts[3], 100);
}

TEST(Corpus, GeneratedLabelsMatchFamilies) {
  CorpusSpec spec;
  spec.windows = 120;
  const auto corpus = generate_corpus(spec, 5);
  ASSERT_EQ(corpus.windows.size(), 120u);
  SceneIndex idx(corpus.records);
  for (std::size_t i = 0; i < corpus.windows.size(); ++i) {
    const auto labels = label_maneuvers(corpus.windows[i], idx);
    const auto fam = corpus.families[i];
    const bool any_left = std::count(labels.begin(), labels.end(), Maneuver::left) > 0;
    const bool any_right = std::count(labels.begin(), labels.end(), Maneuver::right) > 0;
    switch (fam) {
      case ScenarioFamily::left_change: EXPECT_TRUE(any_left && !any_right) << i; break;
      case ScenarioFamily::right_change: EXPECT_TRUE(any_right && !any_left) << i; break;
      default: EXPECT_FALSE(any_left || any_right) << i; break;
    }
  }
  EXPECT_EQ(generate_corpus(spec, 5).records, corpus.records);
}

TEST(Corpus, FixturesAreValidScenes) {
  for (const auto& f : {slower_leader_fixture(), rear_left_blocker_fixture()}) {
    const auto recs = generate(f.spec, f.seed);
    SceneIndex idx(recs);
    const auto slots = assign_slots(*idx.scene(f.window.t0_frame), f.window.target_id);
    bool in_slot = false;
    for (std::size_t s = 1; s < kSlots; ++s) in_slot = in_slot || slots.vehicles[s] == f.removable;
    EXPECT_TRUE(in_slot);
    EXPECT_NE(f.before, f.after);
    EXPECT_NO_THROW(edit_scene(recs, f.removable));
  }
}
