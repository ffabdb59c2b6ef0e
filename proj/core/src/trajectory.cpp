#include "lanecast/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <charconv>

namespace lanecast {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("failed to format number");
  return {buf, end};
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_canonical(std::ostream& out, std::span<const TrajectoryRecord> records) {
  out << "vehicle_id,frame,x,y,v,a,lane_id\n";
  for (const auto& r : records) {
    out << r.vehicle_id << ',' << r.frame << ',' << format_double(r.x) << ',' << format_double(r.y) << ','
        << format_double(r.v) << ',' << format_double(r.a) << ',' << r.lane_id << '\n';
  }
}

void write_canonical_file(const std::filesystem::path& path, std::span<const TrajectoryRecord> records) {
  auto out = open_for_write(path);
  write_canonical(out, records);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void derive_kinematics(std::span<TrajectoryRecord> track, std::size_t smoothing, double dt) {
  const std::size_t n = track.size();
  if (n == 0) return;
  if (n == 1) {
    track[0].v = 0.0;
    track[0].a = 0.0;
    return;
  }
  std::vector<double> x(n);
  const std::size_t half = std::max<std::size_t>(smoothing, 1) / 2;
  for (std::size_t i = 0; i < n; ++i) {
    // the window shrinks symmetrically near the ends so it stays centered
    const std::size_t h = std::min({half, i, n - 1 - i});
    double sum = 0.0;
    for (std::size_t j = i - h; j <= i + h; ++j) sum += track[j].x;
    x[i] = sum / static_cast<double>(2 * h + 1);
  }
  auto diff = [&](const std::vector<double>& f) {
    std::vector<double> d(n);
    d[0] = (f[1] - f[0]) / dt;
    d[n - 1] = (f[n - 1] - f[n - 2]) / dt;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dt);
    return d;
  };
  const auto v = diff(x);
  const auto a = diff(v);
  for (std::size_t i = 0; i < n; ++i) {
    track[i].v = v[i];
    track[i].a = a[i];
  }
}

const TrajectoryRecord* Scene::find(VehicleId id) const noexcept {
  auto it = std::lower_bound(records.begin(), records.end(), id,
                             [](const TrajectoryRecord& r, VehicleId v) { return r.vehicle_id < v; });
  return it != records.end() && it->vehicle_id == id ? &*it : nullptr;
}

SceneIndex::SceneIndex(std::span<const TrajectoryRecord> records) {
  for (const auto& r : records) {
    auto& scene = scenes_[r.frame];
    scene.frame = r.frame;
    scene.records.push_back(r);
    auto [it, inserted] = tracks_.try_emplace(r.vehicle_id, TrackSpan{r.frame, r.frame});
    if (!inserted) {
      it->second.first = std::min(it->second.first, r.frame);
      it->second.last = std::max(it->second.last, r.frame);
    }
  }
  for (auto& [frame, scene] : scenes_) {
    std::sort(scene.records.begin(), scene.records.end(),
              [](const TrajectoryRecord& a, const TrajectoryRecord& b) { return a.vehicle_id < b.vehicle_id; });
    for (std::size_t i = 1; i < scene.records.size(); ++i) {
      if (scene.records[i].vehicle_id == scene.records[i - 1].vehicle_id) {
        throw std::invalid_argument("duplicate record for vehicle " + std::to_string(scene.records[i].vehicle_id) +
                                    " at frame " + std::to_string(frame));
      }
    }
  }
}

const Scene* SceneIndex::scene(FrameIndex frame) const noexcept {
  auto it = scenes_.find(frame);
  return it == scenes_.end() ? nullptr : &it->second;
}

const TrajectoryRecord* SceneIndex::record(VehicleId id, FrameIndex frame) const noexcept {
  const Scene* s = scene(frame);
  return s == nullptr ? nullptr : s->find(id);
}

std::vector<VehicleId> SceneIndex::vehicles() const {
  std::vector<VehicleId> ids;
  ids.reserve(tracks_.size());
  for (const auto& [id, span] : tracks_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::optional<SceneIndex::TrackSpan> SceneIndex::track(VehicleId id) const noexcept {
  auto it = tracks_.find(id);
  if (it == tracks_.end()) return std::nullopt;
  return it->second;
}

std::vector<SampleWindow> extract_windows(const SceneIndex& index, FrameIndex stride) {
  if (stride < 1) throw std::invalid_argument("extract_windows: stride must be >= 1");
  std::vector<SampleWindow> windows;
  for (VehicleId id : index.vehicles()) {
    const auto span = *index.track(id);
    if (span.length() < kWindowFrames) continue;
    for (FrameIndex t0 = span.first + kHistoryFrames - 1; t0 + kFutureFrames <= span.last; t0 += stride) {
      bool complete = true;
      for (FrameIndex f = t0 - kHistoryFrames + 1; f <= t0 + kFutureFrames && complete; ++f) {
        complete = index.record(id, f) != nullptr;
      }
      if (complete) windows.push_back({id, t0});
    }
  }
  return windows;
}

std::vector<SampleWindow> extract_windows(std::span<const TrajectoryRecord> records, FrameIndex stride) {
  return extract_windows(SceneIndex(records), stride);
}

VehicleSplit split_by_vehicle(std::span<const VehicleId> ids_in, std::array<double, 3> fractions,
                              std::uint64_t seed) {
  for (double f : fractions) {
    if (!(f >= 0.0)) throw std::invalid_argument("split_by_vehicle: fractions must be non-negative");
  }
  const double total = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("split_by_vehicle: fractions must sum to 1");
  std::vector<VehicleId> ids(ids_in.begin(), ids_in.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const std::size_t wanted = static_cast<std::size_t>(std::count_if(fractions.begin(), fractions.end(),
                                                                    [](double f) { return f > 0.0; }));
  if (ids.size() < wanted) {
    throw std::invalid_argument("split_by_vehicle: " + std::to_string(ids.size()) + " vehicles cannot fill " +
                                std::to_string(wanted) + " splits");
  }

  // largest remainder, then make sure every requested split is non-empty
  const std::size_t n = ids.size();
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = fractions[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 3; ++i) {
      if (remainder[i] > remainder[best]) best = i;
    }
    ++counts[best];
    remainder[best] = -1.0;
    ++assigned;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (fractions[i] > 0.0 && counts[i] == 0) {
      auto donor = std::max_element(counts.begin(), counts.end()) - counts.begin();
      --counts[static_cast<std::size_t>(donor)];
      ++counts[i];
    }
  }

  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(ids[i - 1], ids[pick(rng)]);
  }
  VehicleSplit split;
  auto begin = ids.begin();
  split.train.assign(begin, begin + static_cast<std::ptrdiff_t>(counts[0]));
  begin += static_cast<std::ptrdiff_t>(counts[0]);
  split.val.assign(begin, begin + static_cast<std::ptrdiff_t>(counts[1]));
  begin += static_cast<std::ptrdiff_t>(counts[1]);
  split.test.assign(begin, ids.end());
  for (auto* part : {&split.train, &split.val, &split.test}) std::sort(part->begin(), part->end());
  return split;
}

VehicleSplit split_by_vehicle(std::span<const TrajectoryRecord> records, std::array<double, 3> fractions,
                              std::uint64_t seed) {
  std::vector<VehicleId> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.vehicle_id);
  return split_by_vehicle(ids, fractions, seed);
}

void write_id_list(const std::filesystem::path& path, std::span<const VehicleId> ids) {
  auto out = open_for_write(path);
  for (VehicleId id : ids) out << id << '\n';
}

std::vector<VehicleId> read_id_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open id list " + path.string());
  std::vector<VehicleId> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    VehicleId id = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), id);
    if (ec != std::errc{}) throw ParseError(line_no, "invalid vehicle id '" + line + "' in " + path.string());
    ids.push_back(id);
  }
  return ids;
}

void write_window_list(const std::filesystem::path& path, std::span<const SampleWindow> windows) {
  auto out = open_for_write(path);
  out << "vehicle_id,t0_frame\n";
  for (const auto& w : windows) out << w.target_id << ',' << w.t0_frame << '\n';
}

std::vector<SampleWindow> read_window_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open window list " + path.string());
  std::vector<SampleWindow> windows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    const auto comma = line.find(',');
    SampleWindow w;
    if (comma == std::string::npos ||
        std::from_chars(line.data(), line.data() + comma, w.target_id).ec != std::errc{} ||
        std::from_chars(line.data() + comma + 1, line.data() + line.size(), w.t0_frame).ec != std::errc{}) {
      throw ParseError(line_no, "invalid window entry '" + line + "' in " + path.string());
    }
    windows.push_back(w);
  }
  return windows;
}

}  // namespace lanecast
