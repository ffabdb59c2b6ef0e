#include "lanecast/config.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace lanecast {

namespace {

using nlohmann::json;

void only_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, std::string_view where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + ": wrong type");
  }
}

Maneuver parse_direction(const std::string& s, std::string_view where) {
  if (s == "left") return Maneuver::left;
  if (s == "right") return Maneuver::right;
  throw ConfigError(std::string(where) + ": direction must be 'left' or 'right', got '" + s + "'");
}

ScenarioSpec scenario_from(const json& j) {
  only_keys(j, "scenario", {"lanes", "lane_width", "duration", "noise", "first_frame", "vehicles"});
  ScenarioSpec s;
  read(j, "lanes", s.lanes, "scenario");
  read(j, "lane_width", s.lane_width, "scenario");
  read(j, "duration", s.duration, "scenario");
  read(j, "noise", s.noise, "scenario");
  read(j, "first_frame", s.first_frame, "scenario");
  if (!j.contains("vehicles") || !j["vehicles"].is_array()) throw ConfigError("scenario: 'vehicles' array required");
  for (const auto& v : j["vehicles"]) {
    const std::string where = "scenario.vehicles";
    only_keys(v, where, {"id", "x", "lane", "v", "a", "lane_change", "speed_change"});
    if (!v.contains("id")) throw ConfigError(where + ": every vehicle needs an 'id'");
    VehicleScript script;
    read(v, "id", script.id, where);
    read(v, "x", script.x, where);
    read(v, "lane", script.lane, where);
    read(v, "v", script.v, where);
    read(v, "a", script.a, where);
    if (v.contains("lane_change")) {
      const auto& lc = v["lane_change"];
      only_keys(lc, where + ".lane_change", {"direction", "start", "duration"});
      LaneChangeCommand c;
      std::string dir = "left";
      read(lc, "direction", dir, where);
      c.direction = parse_direction(dir, where + ".lane_change");
      read(lc, "start", c.start, where);
      read(lc, "duration", c.duration, where);
      script.lane_change = c;
    }
    if (v.contains("speed_change")) {
      const auto& sc = v["speed_change"];
      only_keys(sc, where + ".speed_change", {"start", "duration", "accel"});
      SpeedCommand c;
      read(sc, "start", c.start, where);
      read(sc, "duration", c.duration, where);
      read(sc, "accel", c.accel, where);
      script.speed_change = c;
    }
    s.vehicles.push_back(script);
  }
  return s;
}

json scenario_to(const ScenarioSpec& s) {
  json j{{"lanes", s.lanes},   {"lane_width", s.lane_width},   {"duration", s.duration},
         {"noise", s.noise},   {"first_frame", s.first_frame}, {"vehicles", json::array()}};
  for (const auto& v : s.vehicles) {
    json e{{"id", v.id}, {"x", v.x}, {"lane", v.lane}, {"v", v.v}, {"a", v.a}};
    if (v.lane_change) {
      e["lane_change"] = {{"direction", std::string(to_string(v.lane_change->direction))},
                          {"start", v.lane_change->start},
                          {"duration", v.lane_change->duration}};
    }
    if (v.speed_change) {
      e["speed_change"] = {
          {"start", v.speed_change->start}, {"duration", v.speed_change->duration}, {"accel", v.speed_change->accel}};
    }
    j["vehicles"].push_back(e);
  }
  return j;
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

ScenarioSpec parse_scenario(std::string_view json_text) {
  const auto j = parse_text(json_text);
  return scenario_from(j.contains("scenario") ? j["scenario"] : j);
}

RunConfig parse_run_config(std::string_view json_text) {
  const auto j = parse_text(json_text);
  only_keys(j, "config", {"seed", "train", "neighborhood", "split", "ablation", "corpus", "scenario"});
  RunConfig c;
  read(j, "seed", c.seed, "config");
  if (j.contains("train")) {
    const auto& t = j["train"];
    only_keys(t, "train",
              {"learning_rate", "epochs", "batch_size", "seed", "teacher_forcing", "keep_best", "patience", "workers",
               "final_lr_scale"});
    read(t, "learning_rate", c.train.learning_rate, "train");
    read(t, "epochs", c.train.epochs, "train");
    read(t, "batch_size", c.train.batch_size, "train");
    read(t, "seed", c.train.seed, "train");
    read(t, "teacher_forcing", c.train.teacher_forcing, "train");
    read(t, "keep_best", c.train.keep_best, "train");
    read(t, "patience", c.train.patience, "train");
    read(t, "workers", c.train.workers, "train");
    read(t, "final_lr_scale", c.train.final_lr_scale, "train");
    if (!c.train.teacher_forcing) throw ConfigError("train.teacher_forcing: the regressor is only trained with ground-truth maneuvers");
    if (!(c.train.learning_rate > 0.0) || c.train.epochs == 0 || c.train.batch_size == 0) {
      throw ConfigError("train: learning_rate, epochs and batch_size must be positive");
    }
  }
  if (j.contains("neighborhood")) {
    const auto& n = j["neighborhood"];
    only_keys(n, "neighborhood", {"side_gate_m", "stride", "normalize"});
    read(n, "side_gate_m", c.slots.side_gate, "neighborhood");
    read(n, "stride", c.stride, "neighborhood");
    read(n, "normalize", c.normalize, "neighborhood");
    if (!(c.slots.side_gate > 0.0)) throw ConfigError("neighborhood.side_gate_m must be positive");
    if (c.stride <= 0) throw ConfigError("neighborhood.stride must be positive");
  }
  read(j, "split", c.split, "config");
  if (j.contains("ablation")) {
    only_keys(j["ablation"], "ablation", {"variant"});
    std::string name = "full";
    read(j["ablation"], "variant", name, "ablation");
    try {
      c.variant = parse_variant(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("ablation: ") + e.what());
    }
  }
  if (j.contains("corpus")) {
    const auto& k = j["corpus"];
    only_keys(k, "corpus", {"windows", "left_share", "right_share", "noise", "lane_width"});
    read(k, "windows", c.corpus.windows, "corpus");
    read(k, "left_share", c.corpus.left_share, "corpus");
    read(k, "right_share", c.corpus.right_share, "corpus");
    read(k, "noise", c.corpus.noise, "corpus");
    read(k, "lane_width", c.corpus.lane_width, "corpus");
  }
  if (j.contains("scenario")) c.scenario = scenario_from(j["scenario"]);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_run_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump_run_config(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["train"] = {{"learning_rate", c.train.learning_rate}, {"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},       {"seed", c.train.seed},
                {"teacher_forcing", c.train.teacher_forcing}, {"keep_best", c.train.keep_best},
                {"patience", c.train.patience},           {"workers", c.train.workers},
                {"final_lr_scale", c.train.final_lr_scale}};
  j["neighborhood"] = {{"side_gate_m", c.slots.side_gate}, {"stride", c.stride}, {"normalize", c.normalize}};
  j["split"] = c.split;
  j["ablation"] = {{"variant", std::string(to_string(c.variant))}};
  j["corpus"] = {{"windows", c.corpus.windows},     {"left_share", c.corpus.left_share},
                 {"right_share", c.corpus.right_share}, {"noise", c.corpus.noise},
                 {"lane_width", c.corpus.lane_width}};
  if (c.scenario) j["scenario"] = scenario_to(*c.scenario);
  return j.dump(2) + "\n";
}

std::string config_fingerprint(const RunConfig& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : dump_run_config(config)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lanecast
