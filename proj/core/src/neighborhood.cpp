#include "lanecast/neighborhood.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

namespace lanecast {

std::string_view to_string(NeighborSlot slot) noexcept {
  switch (slot) {
    case NeighborSlot::T: return "T";
    case NeighborSlot::F: return "F";
    case NeighborSlot::FL: return "FL";
    case NeighborSlot::L: return "L";
    case NeighborSlot::RL: return "RL";
    case NeighborSlot::FR: return "FR";
    case NeighborSlot::R: return "R";
    case NeighborSlot::RR: return "RR";
  }
  return "?";
}

NeighborSlot mirrored(NeighborSlot slot) noexcept {
  switch (slot) {
    case NeighborSlot::FL: return NeighborSlot::FR;
    case NeighborSlot::L: return NeighborSlot::R;
    case NeighborSlot::RL: return NeighborSlot::RR;
    case NeighborSlot::FR: return NeighborSlot::FL;
    case NeighborSlot::R: return NeighborSlot::L;
    case NeighborSlot::RR: return NeighborSlot::RL;
    default: return slot;
  }
}

std::string_view to_string(Maneuver m) noexcept {
  switch (m) {
    case Maneuver::straight: return "straight";
    case Maneuver::left: return "left";
    case Maneuver::right: return "right";
  }
  return "?";
}

namespace {

struct Candidate {
  const TrajectoryRecord* rec = nullptr;
  double key = 0.0;

  // smaller key wins, ties go to the smaller id
  void offer(const TrajectoryRecord& r, double k) {
    if (rec == nullptr || k < key || (k == key && r.vehicle_id < rec->vehicle_id)) {
      rec = &r;
      key = k;
    }
  }
};

void set(SlotAssignment& out, NeighborSlot slot, const Candidate& c) {
  if (c.rec != nullptr) out.vehicles[static_cast<std::size_t>(slot)] = c.rec->vehicle_id;
}

}  // namespace

SlotAssignment assign_slots(const Scene& scene, VehicleId target, const SlotRules& rules) {
  const TrajectoryRecord* t = scene.find(target);
  if (t == nullptr) {
    throw std::invalid_argument("assign_slots: target " + std::to_string(target) + " not present at frame " +
                                std::to_string(scene.frame));
  }
  if (t->lane_id <= 0) throw std::invalid_argument("assign_slots: target has no valid lane id");

  SlotAssignment out;
  out.vehicles[static_cast<std::size_t>(NeighborSlot::T)] = target;

  Candidate front;
  // index 0 = left lane (+1), 1 = right lane (-1)
  Candidate side[2];
  for (const auto& r : scene.records) {
    if (r.vehicle_id == target) continue;
    const double dx = r.x - t->x;
    if (r.lane_id == t->lane_id) {
      if (dx > 0.0) front.offer(r, dx);
    } else if (r.lane_id == t->lane_id + 1 || r.lane_id == t->lane_id - 1) {
      const int k = r.lane_id == t->lane_id + 1 ? 0 : 1;
      if (std::abs(dx) <= rules.side_gate) side[k].offer(r, std::abs(dx));
    }
  }
  set(out, NeighborSlot::F, front);

  Candidate ahead[2];
  Candidate behind[2];
  for (const auto& r : scene.records) {
    if (r.vehicle_id == target) continue;
    const int k = r.lane_id == t->lane_id + 1 ? 0 : (r.lane_id == t->lane_id - 1 ? 1 : -1);
    if (k < 0 || (side[k].rec != nullptr && side[k].rec->vehicle_id == r.vehicle_id)) continue;
    const double dx = r.x - t->x;
    if (dx >= 0.0) {
      ahead[k].offer(r, dx);
    } else {
      behind[k].offer(r, -dx);
    }
  }
  set(out, NeighborSlot::L, side[0]);
  set(out, NeighborSlot::FL, ahead[0]);
  set(out, NeighborSlot::RL, behind[0]);
  set(out, NeighborSlot::R, side[1]);
  set(out, NeighborSlot::FR, ahead[1]);
  set(out, NeighborSlot::RR, behind[1]);
  return out;
}

std::uint64_t Normalizer::hash() const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](double v) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ull;
    }
  };
  for (double v : input_mean) mix(v);
  for (double v : input_std) mix(v);
  for (double v : output_mean) mix(v);
  for (double v : output_std) mix(v);
  return h;
}

NeighborhoodTensor build_raw_tensor(const SampleWindow& window, const SceneIndex& index, const SlotRules& rules) {
  const Scene* now = index.scene(window.t0_frame);
  if (now == nullptr || now->find(window.target_id) == nullptr) {
    throw std::invalid_argument("build_tensor: target " + std::to_string(window.target_id) + " missing at t0 frame " +
                                std::to_string(window.t0_frame));
  }
  NeighborhoodTensor out;
  out.slots = assign_slots(*now, window.target_id, rules);
  const TrajectoryRecord& origin = *now->find(window.target_id);
  out.origin_x = origin.x;
  out.origin_y = origin.y;

  for (FrameIndex f = window.history_begin(); f <= window.t0_frame; ++f) {
    if (index.record(window.target_id, f) == nullptr) {
      throw std::invalid_argument("build_tensor: target " + std::to_string(window.target_id) + " missing at frame " +
                                  std::to_string(f));
    }
  }
  for (std::size_t s = 0; s < kSlots; ++s) {
    const auto id = out.slots.vehicles[s];
    out.mask[s] = id.has_value();
    if (!id) continue;
    for (FrameIndex f = window.history_begin(); f <= window.t0_frame; ++f) {
      const TrajectoryRecord* r = index.record(*id, f);
      const auto col = static_cast<std::size_t>(f - window.history_begin());
      if (r == nullptr) continue;
      out.present[s][col] = true;
      out.values(0, s, col) = static_cast<Real>(r->x - origin.x);
      out.values(1, s, col) = static_cast<Real>(r->y - origin.y);
      out.values(2, s, col) = static_cast<Real>(r->v);
      out.values(3, s, col) = static_cast<Real>(r->a);
    }
  }
  return out;
}

void normalize_tensor(NeighborhoodTensor& tensor, const Normalizer& normalizer) {
  for (std::size_t c = 0; c < kChannels; ++c) {
    const double mean = normalizer.input_mean[c];
    const double inv_std = 1.0 / normalizer.input_std[c];
    for (std::size_t s = 0; s < kSlots; ++s) {
      for (std::size_t k = 0; k < static_cast<std::size_t>(kHistoryFrames); ++k) {
        Real& v = tensor.values(c, s, k);
        v = tensor.present[s][k] ? static_cast<Real>((static_cast<double>(v) - mean) * inv_std) : Real{0};
      }
    }
  }
}

NeighborhoodTensor build_tensor(const SampleWindow& window, const SceneIndex& index, const Normalizer& normalizer,
                                const SlotRules& rules) {
  auto tensor = build_raw_tensor(window, index, rules);
  normalize_tensor(tensor, normalizer);
  return tensor;
}

ManeuverSequence label_maneuvers(std::span<const int> lane_ids, std::size_t t0_index) {
  if (t0_index >= lane_ids.size()) throw std::out_of_range("label_maneuvers: t0 index outside lane-id sequence");
  for (std::size_t i = 0; i < lane_ids.size(); ++i) {
    if (lane_ids[i] <= 0) {
      throw std::invalid_argument("label_maneuvers: unknown lane id " + std::to_string(lane_ids[i]) + " at offset " +
                                  std::to_string(static_cast<long>(i) - static_cast<long>(t0_index)));
    }
  }
  struct Crossing {
    double time;
    Maneuver direction;
  };
  std::vector<Crossing> crossings;
  for (std::size_t i = 1; i < lane_ids.size(); ++i) {
    if (lane_ids[i] == lane_ids[i - 1]) continue;
    const double time = (static_cast<double>(i) - static_cast<double>(t0_index)) / kFrameRate;
    crossings.push_back({time, lane_ids[i] > lane_ids[i - 1] ? Maneuver::left : Maneuver::right});
  }
  constexpr double kHalfWindow = 2.0;
  ManeuverSequence out{};
  out.fill(Maneuver::straight);
  for (std::size_t step = 0; step < kPredictionSteps; ++step) {
    const double t = static_cast<double>(step + 1);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : crossings) {
      const double d = std::abs(t - c.time);
      if (d <= kHalfWindow + 1e-9 && d < best) {
        best = d;
        out[step] = c.direction;
      }
    }
  }
  return out;
}

ManeuverSequence label_maneuvers(const SampleWindow& window, const SceneIndex& index) {
  // crossings up to 2 s beyond either end of the 1..5 s horizon can matter
  constexpr FrameIndex kBefore = 2 * kFramesPerStep;
  constexpr FrameIndex kAfter = kFutureFrames + 2 * kFramesPerStep;
  if (index.record(window.target_id, window.t0_frame) == nullptr) {
    throw std::invalid_argument("label_maneuvers: target missing at t0");
  }
  FrameIndex first = window.t0_frame;
  while (first > window.t0_frame - kBefore && index.record(window.target_id, first - 1) != nullptr) --first;
  FrameIndex last = window.t0_frame;
  while (last < window.t0_frame + kAfter && index.record(window.target_id, last + 1) != nullptr) ++last;
  if (last < window.future_end()) {
    throw std::invalid_argument("label_maneuvers: target " + std::to_string(window.target_id) +
                                " lacks 50 future frames after " + std::to_string(window.t0_frame));
  }
  std::vector<int> lanes;
  for (FrameIndex f = first; f <= last; ++f) lanes.push_back(index.record(window.target_id, f)->lane_id);
  return label_maneuvers(lanes, static_cast<std::size_t>(window.t0_frame - first));
}

OffsetArray target_offsets(const SampleWindow& window, const SceneIndex& index) {
  const TrajectoryRecord* origin = index.record(window.target_id, window.t0_frame);
  if (origin == nullptr) throw std::invalid_argument("target_offsets: target missing at t0");
  OffsetArray out{};
  for (std::size_t step = 0; step < kPredictionSteps; ++step) {
    const FrameIndex f = window.t0_frame + static_cast<FrameIndex>(step + 1) * kFramesPerStep;
    const TrajectoryRecord* r = index.record(window.target_id, f);
    if (r == nullptr) {
      throw std::invalid_argument("target_offsets: target " + std::to_string(window.target_id) + " missing at frame " +
                                  std::to_string(f));
    }
    out[2 * step] = r->x - origin->x;
    out[2 * step + 1] = r->y - origin->y;
  }
  return out;
}

OffsetArray normalize_offsets(const OffsetArray& raw, const Normalizer& n) {
  OffsetArray out{};
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - n.output_mean[i % 2]) / n.output_std[i % 2];
  return out;
}

OffsetArray denormalize_offsets(const OffsetArray& normalized, const Normalizer& n) {
  OffsetArray out{};
  for (std::size_t i = 0; i < normalized.size(); ++i) out[i] = normalized[i] * n.output_std[i % 2] + n.output_mean[i % 2];
  return out;
}

void NormalizerFit::add(const NeighborhoodTensor& raw) {
  for (std::size_t s = 0; s < kSlots; ++s) {
    for (std::size_t k = 0; k < static_cast<std::size_t>(kHistoryFrames); ++k) {
      if (!raw.present[s][k]) continue;
      for (std::size_t c = 0; c < kChannels; ++c) {
        const double v = raw.values(c, s, k);
        sum_[c] += v;
        sq_[c] += v * v;
      }
      count_ += 1.0;
    }
  }
}

void NormalizerFit::add(const OffsetArray& raw) {
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out_sum_[i % 2] += raw[i];
    out_sq_[i % 2] += raw[i] * raw[i];
  }
  out_count_ += static_cast<double>(kPredictionSteps);
}

Normalizer NormalizerFit::result() const {
  Normalizer n;
  auto finish = [](double sum, double sq, double count, double& mean, double& std) {
    if (count <= 0.0) return;
    mean = sum / count;
    const double var = std::max(sq / count - mean * mean, 0.0);
    std = std::sqrt(var);
    if (!(std > 1e-9)) std = 1.0;
  };
  for (std::size_t c = 0; c < kChannels; ++c) finish(sum_[c], sq_[c], count_, n.input_mean[c], n.input_std[c]);
  for (std::size_t a = 0; a < 2; ++a) finish(out_sum_[a], out_sq_[a], out_count_, n.output_mean[a], n.output_std[a]);
  return n;
}

}  // namespace lanecast
