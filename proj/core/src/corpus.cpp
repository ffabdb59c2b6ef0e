#include "lanecast/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "lanecast/parallel.hpp"

namespace lanecast {

namespace {

constexpr double kT0 = static_cast<double>(kScenarioT0) / kFrameRate;
constexpr double kTriggerGap = 20.0;
constexpr double kChangeDuration = 4.0;
constexpr double kBrake = 2.0;

enum class LaneState { free, side_blocked, rear_blocked };

class Builder {
 public:
  Builder(std::size_t index, double lane_width, double noise, std::mt19937_64& rng) : rng_(rng) {
    spec_.lanes = 3;
    spec_.lane_width = lane_width;
    spec_.duration = static_cast<double>(kScenarioFrames) / kFrameRate;
    spec_.noise = noise;
    spec_.first_frame = static_cast<FrameIndex>(index) * kScenarioSpacing;
    base_id_ = static_cast<VehicleId>(index) * 100;
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
  template <typename T>
  T pick(std::initializer_list<T> options) {
    std::uniform_int_distribution<std::size_t> d(0, options.size() - 1);
    return *(options.begin() + static_cast<std::ptrdiff_t>(d(rng_)));
  }

  VehicleScript& target(int lane, double v, double a) {
    spec_.vehicles.push_back({next_id(), 0.0, lane, v, a, std::nullopt, std::nullopt});
    v_ = v;
    a_ = a;
    return spec_.vehicles.back();
  }

  /// Adds a vehicle at longitudinal offset dx from the target at t0.
  void add_at_t0(int lane, double dx, double v) { add_at(lane, dx, v, kT0); }

  /// Adds a vehicle whose offset from the target at time t is dx.
  void add_at(int lane, double dx, double v, double t) {
    if (lane < 1 || lane > spec_.lanes) return;
    const double target_x = longitudinal_at(spec_.vehicles.front(), t).x;
    const double x0 = target_x + dx - v * t - 0.5 * a_ * t * t;
    spec_.vehicles.push_back({next_id(), x0, lane, v, a_, std::nullopt, std::nullopt});
  }

  void populate(int lane, LaneState state) {
    if (lane < 1 || lane > spec_.lanes) return;
    switch (state) {
      case LaneState::free:
        break;
      case LaneState::side_blocked:
        add_at_t0(lane, uniform(-8.0, 8.0), v_ + uniform(-0.5, 0.5));
        break;
      case LaneState::rear_blocked:
        add_at_t0(lane, uniform(-35.0, -18.0), v_ + uniform(2.0, 5.0));
        break;
    }
    if (coin(0.5)) add_at_t0(lane, uniform(45.0, 70.0), v_ + uniform(1.0, 4.0));
    if (state != LaneState::rear_blocked && coin(0.5)) add_at_t0(lane, uniform(-80.0, -50.0), v_ - uniform(0.0, 3.0));
  }

  LaneState blocked_state() { return coin(0.5) ? LaneState::side_blocked : LaneState::rear_blocked; }
  LaneState any_state() { return pick({LaneState::free, LaneState::side_blocked, LaneState::rear_blocked}); }

  void maybe_follower(int lane) {
    if (coin(0.3)) add_at_t0(lane, uniform(-40.0, -20.0), v_ + uniform(-1.0, 1.0));
  }

  double v() const { return v_; }
  double a() const { return a_; }

  CorpusScenario finish(ScenarioFamily family) {
    CorpusScenario out;
    out.window = {spec_.vehicles.front().id, spec_.first_frame + kScenarioT0};
    out.spec = std::move(spec_);
    out.family = family;
    return out;
  }

 private:
  VehicleId next_id() { return base_id_ + static_cast<VehicleId>(spec_.vehicles.size()) + 1; }

  std::mt19937_64& rng_;
  ScenarioSpec spec_;
  VehicleId base_id_ = 0;
  double v_ = 0.0;
  double a_ = 0.0;
};

/// Crossing time relative to t0 for scripted changes, on a half-second grid
/// so that no crossing sits on a label boundary.
double draw_crossing(Builder& b) {
  return -0.5 + static_cast<double>(b.pick({0, 1, 2, 3, 4, 5, 6, 7}));
}

CorpusScenario lane_change_scenario(Builder& b, Maneuver direction) {
  const int lane = direction == Maneuver::left ? b.pick({1, 2}) : 2;
  auto& target = b.target(lane, b.uniform(22.0, 30.0), b.uniform(-0.3, 0.3));
  const double crossing = draw_crossing(b);
  const double start = kT0 + crossing - kChangeDuration / 2.0;
  target.lane_change = LaneChangeCommand{direction, start, kChangeDuration};
  b.add_at(lane, kTriggerGap, b.v() - b.uniform(3.0, 6.0), start);
  if (direction == Maneuver::left) {
    b.populate(lane + 1, LaneState::free);
    b.populate(lane - 1, b.any_state());
  } else {
    b.populate(lane + 1, b.blocked_state());
    b.populate(lane - 1, LaneState::free);
  }
  b.maybe_follower(lane);
  return b.finish(direction == Maneuver::left ? ScenarioFamily::left_change : ScenarioFamily::right_change);
}

CorpusScenario cruise_scenario(Builder& b) {
  const int lane = b.pick({1, 2, 3});
  b.target(lane, b.uniform(22.0, 30.0), b.uniform(-0.3, 0.3));
  switch (b.pick({0, 1, 2})) {
    case 0:
      break;
    case 1:
      b.add_at_t0(lane, b.uniform(15.0, 60.0), b.v() + b.uniform(0.5, 4.0));
      break;
    default: {
      // slow leader still too far away to trigger a change inside the horizon
      const double crossing = b.pick({7.5, 8.5});
      b.add_at(lane, kTriggerGap, b.v() - b.uniform(3.0, 6.0), kT0 + crossing - kChangeDuration / 2.0);
      break;
    }
  }
  b.populate(lane + 1, b.any_state());
  b.populate(lane - 1, b.any_state());
  b.maybe_follower(lane);
  return b.finish(ScenarioFamily::cruise);
}

CorpusScenario blocked_scenario(Builder& b) {
  constexpr int lane = 2;
  auto& target = b.target(lane, b.uniform(22.0, 30.0), b.uniform(-0.3, 0.3));
  const double closing = b.uniform(3.0, 6.0);
  const double start = kT0 + b.uniform(-2.5, 4.5);
  target.speed_change = SpeedCommand{start, closing / kBrake, b.a() - kBrake};
  b.add_at(lane, kTriggerGap, b.v() - closing, start);
  b.populate(lane + 1, b.blocked_state());
  b.populate(lane - 1, b.blocked_state());
  b.maybe_follower(lane);
  return b.finish(ScenarioFamily::blocked);
}

}  // namespace

std::string_view to_string(ScenarioFamily family) noexcept {
  switch (family) {
    case ScenarioFamily::left_change: return "left_change";
    case ScenarioFamily::right_change: return "right_change";
    case ScenarioFamily::cruise: return "cruise";
    case ScenarioFamily::blocked: return "blocked";
  }
  return "?";
}

std::vector<CorpusScenario> plan_corpus(const CorpusSpec& spec, std::uint64_t seed) {
  if (spec.windows == 0) throw std::invalid_argument("corpus: window count must be positive");
  if (spec.left_share < 0.0 || spec.right_share < 0.0 || spec.left_share + spec.right_share > 1.0) {
    throw std::invalid_argument("corpus: family shares must be non-negative and sum to at most 1");
  }
  if (!(spec.noise >= 0.0) || !(spec.lane_width > 0.0)) {
    throw std::invalid_argument("corpus: noise must be non-negative and lane width positive");
  }
  const auto n = spec.windows;
  const auto lefts = static_cast<std::size_t>(std::llround(spec.left_share * static_cast<double>(n)));
  const auto rights = std::min(n - lefts, static_cast<std::size_t>(std::llround(spec.right_share * static_cast<double>(n))));
  const std::size_t straights = n - lefts - rights;
  std::vector<ScenarioFamily> families;
  families.insert(families.end(), lefts, ScenarioFamily::left_change);
  families.insert(families.end(), rights, ScenarioFamily::right_change);
  families.insert(families.end(), straights / 2, ScenarioFamily::cruise);
  families.insert(families.end(), straights - straights / 2, ScenarioFamily::blocked);

  std::mt19937_64 order_rng(seed);
  std::shuffle(families.begin(), families.end(), order_rng);

  std::vector<CorpusScenario> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    Builder b(i, spec.lane_width, spec.noise, rng);
    switch (families[i]) {
      case ScenarioFamily::left_change: out.push_back(lane_change_scenario(b, Maneuver::left)); break;
      case ScenarioFamily::right_change: out.push_back(lane_change_scenario(b, Maneuver::right)); break;
      case ScenarioFamily::cruise: out.push_back(cruise_scenario(b)); break;
      case ScenarioFamily::blocked: out.push_back(blocked_scenario(b)); break;
    }
  }
  return out;
}

Corpus generate_corpus(const CorpusSpec& spec, std::uint64_t seed) {
  const auto plan = plan_corpus(spec, seed);
  std::vector<std::vector<TrajectoryRecord>> parts(plan.size());
  parallel_for(plan.size(), [&](std::size_t i) { parts[i] = generate(plan[i].spec, seed + 0x5bd1e995ull * (i + 1)); });
  Corpus corpus;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    corpus.records.insert(corpus.records.end(), parts[i].begin(), parts[i].end());
    corpus.windows.push_back(plan[i].window);
    corpus.families.push_back(plan[i].family);
  }
  std::sort(corpus.records.begin(), corpus.records.end(), [](const auto& a, const auto& b) {
    return a.vehicle_id != b.vehicle_id ? a.vehicle_id < b.vehicle_id : a.frame < b.frame;
  });
  return corpus;
}

namespace {

ScenarioSpec fixture_base() {
  ScenarioSpec spec;
  spec.lanes = 3;
  spec.lane_width = 3.5;
  spec.duration = static_cast<double>(kScenarioFrames) / kFrameRate;
  spec.noise = 0.05;
  return spec;
}

VehicleScript placed(VehicleId id, int lane, double v, const VehicleScript& target, double dx, double t) {
  const double x0 = longitudinal_at(target, t).x + dx - v * t;
  return {id, x0, lane, v, 0.0, std::nullopt, std::nullopt};
}

}  // namespace

InterventionFixture slower_leader_fixture() {
  InterventionFixture f;
  f.spec = fixture_base();
  const double start = kT0 + 2.5 - kChangeDuration / 2.0;
  VehicleScript target{1, 0.0, 2, 26.0, 0.0, LaneChangeCommand{Maneuver::left, start, kChangeDuration}, std::nullopt};
  f.spec.vehicles.push_back(target);
  f.spec.vehicles.push_back(placed(2, 2, 21.0, target, kTriggerGap, start));
  f.spec.vehicles.push_back(placed(3, 3, 29.0, target, 55.0, kT0));
  f.seed = 11;
  f.window = {1, kScenarioT0};
  f.removable = 2;
  f.before = Maneuver::left;
  f.after = Maneuver::straight;
  return f;
}

InterventionFixture rear_left_blocker_fixture() {
  InterventionFixture f;
  f.spec = fixture_base();
  const double start = kT0 + 0.5;
  VehicleScript target{1, 0.0, 2, 26.0, 0.0, std::nullopt, SpeedCommand{start, 2.0, -kBrake}};
  f.spec.vehicles.push_back(target);
  f.spec.vehicles.push_back(placed(2, 2, 22.0, target, kTriggerGap, start));
  f.spec.vehicles.push_back(placed(3, 3, 30.0, target, -25.0, kT0));
  f.spec.vehicles.push_back(placed(4, 1, 26.0, target, 2.0, kT0));
  f.seed = 13;
  f.window = {1, kScenarioT0};
  f.removable = 3;
  f.before = Maneuver::straight;
  f.after = Maneuver::left;
  return f;
}

}  // namespace lanecast
