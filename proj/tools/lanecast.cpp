#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include "lanecast/ablation.hpp"
#include "lanecast/config.hpp"
#include "lanecast/corpus.hpp"
#include "lanecast/evaluation.hpp"
#include "lanecast/model_io.hpp"
#include "lanecast/pipeline.hpp"
#include "lanecast/synth.hpp"
#include "lanecast/training.hpp"

namespace fs = std::filesystem;
using namespace lanecast;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

RunConfig effective_config(const Globals& g) {
  RunConfig c = g.config_path.empty() ? RunConfig{} : load_run_config(g.config_path);
  if (g.seed) {
    c.seed = *g.seed;
    c.train.seed = *g.seed;
  }
  return c;
}

fs::path out_dir(const Globals& g) {
  fs::path p(g.out);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::vector<TrajectoryRecord> read_table(const std::string& path, const std::string& format) {
  if (!fs::exists(path)) throw std::runtime_error("input file not found: " + path);
  return parse_trajectory_file(path, parse_trajectory_format(format));
}

std::vector<SampleWindow> windows_for(const std::vector<TrajectoryRecord>& records, const std::string& windows_path,
                                      FrameIndex stride) {
  if (!windows_path.empty()) return read_window_list(windows_path);
  return extract_windows(records, stride);
}

std::vector<VehicleId> target_ids(std::span<const SampleWindow> windows) {
  std::set<VehicleId> ids;
  for (const auto& w : windows) ids.insert(w.target_id);
  return {ids.begin(), ids.end()};
}

std::string maneuver_letters(const ManeuverSequence& m) {
  std::string s;
  for (auto v : m) s += v == Maneuver::left ? 'L' : (v == Maneuver::right ? 'R' : 'S');
  return s;
}

void log_epochs(const char* what, const EpochStats& e) {
  if (e.epoch == 1 || e.epoch % 25 == 0) {
    std::fprintf(stderr, "[%s] epoch %zu train %.5f val %.5f\n", what, e.epoch, e.train_loss, e.val_loss);
  }
}

Predictor load_predictor(const fs::path& dir) {
  auto cls = load_model(dir / "classifier.stcp");
  auto reg = load_model(dir / "regressor.stcp");
  return Predictor(std::move(cls), std::move(reg));
}

struct SynthArgs {
  std::string fixture;
  bool edited = false;
};

int run_synth(const Globals& g, const SynthArgs& a) {
  const auto cfg = effective_config(g);
  const auto dir = out_dir(g);
  if (!a.fixture.empty()) {
    InterventionFixture f;
    if (a.fixture == "slower_leader") {
      f = slower_leader_fixture();
    } else if (a.fixture == "rear_left_blocker") {
      f = rear_left_blocker_fixture();
    } else {
      throw std::invalid_argument("unknown fixture '" + a.fixture + "' (slower_leader, rear_left_blocker)");
    }
    auto records = generate(f.spec, f.seed);
    if (a.edited) records = edit_scene(records, f.removable);
    write_canonical_file(dir / "trajectories.csv", records);
    const SampleWindow w = f.window;
    write_window_list(dir / "windows.csv", std::span(&w, 1));
    std::printf("fixture %s: target %lld at frame %lld, removable vehicle %lld, expected %s -> %s\n",
                a.fixture.c_str(), static_cast<long long>(w.target_id), static_cast<long long>(w.t0_frame),
                static_cast<long long>(f.removable), std::string(to_string(f.before)).c_str(),
                std::string(to_string(f.after)).c_str());
    return 0;
  }
  if (cfg.scenario) {
    const auto records = generate(*cfg.scenario, cfg.seed);
    write_canonical_file(dir / "trajectories.csv", records);
    std::printf("wrote %zu records to %s\n", records.size(), (dir / "trajectories.csv").c_str());
    return 0;
  }
  const auto corpus = generate_corpus(cfg.corpus, cfg.seed);
  write_canonical_file(dir / "trajectories.csv", corpus.records);
  write_window_list(dir / "windows.csv", corpus.windows);
  std::printf("wrote %zu records and %zu windows to %s\n", corpus.records.size(), corpus.windows.size(),
              dir.c_str());
  return 0;
}

struct InputArgs {
  std::string input;
  std::string format = "canonical";
  std::string windows;
};

int run_ingest(const Globals& g, const InputArgs& a) {
  const auto cfg = effective_config(g);
  const auto dir = out_dir(g);
  const auto records = read_table(a.input, a.format);
  write_canonical_file(dir / "trajectories.csv", records);
  const auto windows = extract_windows(records, cfg.stride);
  write_window_list(dir / "windows.csv", windows);
  const auto split = split_by_vehicle(target_ids(windows), cfg.split, cfg.seed);
  write_id_list(dir / "split_train.txt", split.train);
  write_id_list(dir / "split_val.txt", split.val);
  write_id_list(dir / "split_test.txt", split.test);
  std::printf("%zu records, %zu windows, split %zu/%zu/%zu vehicles\n", records.size(), windows.size(),
              split.train.size(), split.val.size(), split.test.size());
  return 0;
}

int run_label(const Globals& g, const InputArgs& a) {
  const auto cfg = effective_config(g);
  const auto dir = out_dir(g);
  const auto records = read_table(a.input, a.format);
  SceneIndex index(records);
  const auto windows = windows_for(records, a.windows, cfg.stride);
  std::string text = "vehicle_id,t0_frame,maneuvers";
  for (int s = 1; s <= 5; ++s) text += ",dx" + std::to_string(s) + ",dy" + std::to_string(s);
  text += "\n";
  char buf[64];
  for (const auto& w : windows) {
    const auto m = label_maneuvers(w, index);
    const auto o = target_offsets(w, index);
    text += std::to_string(w.target_id) + "," + std::to_string(w.t0_frame) + "," + maneuver_letters(m);
    for (double v : o) {
      std::snprintf(buf, sizeof buf, ",%.6f", v);
      text += buf;
    }
    text += "\n";
  }
  write_text(dir / "labels.csv", text);
  std::printf("labelled %zu windows\n", windows.size());
  return 0;
}

PreparedData prepare(const RunConfig& cfg, const InputArgs& a, VehicleSplit* split_out = nullptr) {
  const auto records = read_table(a.input, a.format);
  SceneIndex index(records);
  const auto windows = windows_for(records, a.windows, cfg.stride);
  const auto split = split_by_vehicle(target_ids(windows), cfg.split, cfg.seed);
  if (split_out) *split_out = split;
  return prepare_dataset(index, windows, split, cfg.dataset_options());
}

int run_train(const Globals& g, const InputArgs& a) {
  const auto cfg = effective_config(g);
  const auto dir = out_dir(g);
  VehicleSplit split;
  const auto data = prepare(cfg, a, &split);
  std::fprintf(stderr, "train %zu, val %zu, test %zu samples\n", data.train.size(), data.val.size(),
               data.test.size());
  const auto profile = profile_of(cfg.variant);
  const auto pair = train_pair(
      data, cfg.train, profile, [](const EpochStats& e) { log_epochs("classifier", e); },
      [](const EpochStats& e) { log_epochs("regressor", e); });
  save_model(pair.classifier.network, data.normalizer, dir / "classifier.stcp");
  save_model(pair.regressor.network, data.normalizer, dir / "regressor.stcp");
  std::string log = "module,epoch,train_loss,val_loss\n";
  char buf[128];
  for (const auto* r : {&pair.classifier, &pair.regressor}) {
    const char* name = r == &pair.classifier ? "classifier" : "regressor";
    for (const auto& e : r->curve) {
      std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%.6f\n", name, e.epoch, e.train_loss, e.val_loss);
      log += buf;
    }
  }
  write_text(dir / "train_log.csv", log);
  write_id_list(dir / "split_test.txt", split.test);
  write_text(dir / "config.json", dump_run_config(cfg));
  std::printf("saved models to %s (best epochs %zu / %zu)\n", dir.c_str(), pair.classifier.best_epoch,
              pair.regressor.best_epoch);
  return 0;
}

struct ModelArgs {
  std::string models;
  std::string report_format = "csv";
};

int run_predict(const Globals& g, const InputArgs& a, const ModelArgs& m) {
  const auto cfg = effective_config(g);
  const auto dir = out_dir(g);
  const auto predictor = load_predictor(m.models);
  const auto records = read_table(a.input, a.format);
  SceneIndex index(records);
  const auto windows = windows_for(records, a.windows, cfg.stride);
  std::vector<NeighborhoodTensor> tensors;
  for (const auto& w : windows) tensors.push_back(build_tensor(w, index, predictor.normalizer(), cfg.slots));
  const auto preds = predictor.predict_batch(tensors);
  std::string text = "vehicle_id,t0_frame,maneuvers";
  for (int s = 1; s <= 5; ++s) text += ",x" + std::to_string(s) + ",y" + std::to_string(s);
  text += "\n";
  char buf[64];
  for (std::size_t i = 0; i < windows.size(); ++i) {
    text += std::to_string(windows[i].target_id) + "," + std::to_string(windows[i].t0_frame) + "," +
            maneuver_letters(preds[i].classification.sequence);
    for (const auto& p : preds[i].trajectory.positions) {
      std::snprintf(buf, sizeof buf, ",%.4f,%.4f", p[0], p[1]);
      text += buf;
    }
    text += "\n";
  }
  write_text(dir / "predictions.csv", text);
  if (windows.size() == 1) std::printf("%s", text.c_str());
  std::printf("predicted %zu windows\n", windows.size());
  return 0;
}

int run_eval(const Globals& g, const InputArgs& a, const ModelArgs& m) {
  const auto cfg = effective_config(g);
  const auto predictor = load_predictor(m.models);
  const auto format = parse_report_format(m.report_format);
  const auto dir = out_dir(g);
  const auto records = read_table(a.input, a.format);
  SceneIndex index(records);
  const auto windows = windows_for(records, a.windows, cfg.stride);
  std::vector<VehicleId> test;
  const fs::path manifest = fs::path(m.models) / "split_test.txt";
  if (fs::exists(manifest)) {
    test = read_id_list(manifest);
  } else {
    test = split_by_vehicle(target_ids(windows), cfg.split, cfg.seed).test;
  }
  const std::set<VehicleId> keep(test.begin(), test.end());
  std::vector<SampleWindow> chosen;
  for (const auto& w : windows)
    if (keep.count(w.target_id)) chosen.push_back(w);
  const auto samples = build_samples(index, chosen, predictor.normalizer(), cfg.slots);
  const auto report = evaluate(predictor, samples, config_fingerprint(cfg));
  const auto path = dir / (format == ReportFormat::delimited ? "report.csv" : "report.json");
  export_report(report, path, format);
  std::printf("%s", format_report(report, ReportFormat::delimited).c_str());
  return 0;
}

struct AblateArgs {
  std::string variant = "all";
};

int run_ablate(const Globals& g, const InputArgs& a, const AblateArgs& v) {
  const auto cfg = effective_config(g);
  const auto dir = out_dir(g);
  const auto data = prepare(cfg, a);
  std::vector<AblationVariant> variants;
  if (v.variant == "all") {
    variants.assign(all_variants().begin(), all_variants().end());
  } else {
    variants.push_back(parse_variant(v.variant));
  }
  std::string table = "variant,parameters";
  for (int s = 1; s <= 5; ++s) table += ",rmse" + std::to_string(s) + "_m";
  for (int s = 1; s <= 5; ++s) table += ",acc" + std::to_string(s);
  table += "\n";
  char buf[64];
  for (auto variant : variants) {
    std::fprintf(stderr, "ablation %s\n", std::string(to_string(variant)).c_str());
    const auto r = run_ablation(variant, data, cfg.train, cfg.seed, [](const EpochStats& e) { log_epochs("train", e); });
    export_report(r.report, dir / ("ablation_" + std::string(to_string(variant)) + ".json"), ReportFormat::structured);
    table += std::string(to_string(variant)) + "," + std::to_string(r.parameter_count);
    for (double x : r.report.rmse) {
      std::snprintf(buf, sizeof buf, ",%.6f", x);
      table += buf;
    }
    for (double x : r.report.accuracy) {
      std::snprintf(buf, sizeof buf, ",%.6f", x);
      table += buf;
    }
    table += "\n";
  }
  write_text(dir / "ablation.csv", table);
  std::printf("%s", table.c_str());
  return 0;
}

struct EditArgs {
  VehicleId remove = 0;
};

int run_edit(const Globals& g, const InputArgs& a, const EditArgs& e) {
  const auto dir = out_dir(g);
  const auto records = read_table(a.input, a.format);
  const auto edited = edit_scene(records, e.remove);
  write_canonical_file(dir / "trajectories.csv", edited);
  std::printf("removed vehicle %lld (%zu records left)\n", static_cast<long long>(e.remove), edited.size());
  return 0;
}

struct InspectArgs {
  std::string model;
  std::string variant = "full";
};

void print_architecture(const NetworkConfig& c) {
  const auto g = trunk_geometry(c);
  std::printf("%s:", std::string(to_string(c.kind)).c_str());
  for (const auto& s : g.shapes) std::printf(" %s", to_string(s).c_str());
  std::printf(" -> %zu features -> %zu parameters\n", g.features, count_parameters(c));
}

int run_inspect(const Globals& g, const InspectArgs& a) {
  (void)g;
  if (!a.model.empty()) {
    const auto m = load_model(a.model);
    print_architecture(m.network.config());
    std::printf("dilated %d, input channels %zu, maneuver input %d, normalizer hash %016llx\n",
                m.network.config().dilated, m.network.config().input_channels, m.network.config().maneuver_input,
                static_cast<unsigned long long>(m.normalizer.hash()));
    return 0;
  }
  const auto profile = profile_of(parse_variant(a.variant));
  const auto c = network_config(ModuleKind::classifier, profile);
  const auto r = network_config(ModuleKind::regressor, profile);
  print_architecture(c);
  print_architecture(r);
  const auto rf = receptive_fields(c);
  std::printf("receptive fields:");
  for (const auto& f : rf) std::printf(" %zux%zux%zu", f.channels, f.rows, f.cols);
  std::printf("\ntotal parameters %zu\n", count_parameters(c) + count_parameters(r));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maneuver-conditioned trajectory prediction for highway traffic"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for data generation, splitting and training");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  auto add_input = [](CLI::App* sub, InputArgs& a, bool windows) {
    sub->add_option("--input", a.input, "Trajectory table")->required();
    sub->add_option("--format", a.format, "canonical, highd or ngsim")->capture_default_str();
    if (windows) sub->add_option("--windows", a.windows, "Window list (vehicle_id,t0_frame); default: all windows");
  };

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "Generate a synthetic corpus, a configured scenario, or a fixture");
  s_synth->add_option("--fixture", synth.fixture, "slower_leader or rear_left_blocker");
  s_synth->add_flag("--edited", synth.edited, "Write the fixture with its removable vehicle deleted");

  InputArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "Convert a recorded table to the canonical format and split it");
  add_input(s_ingest, ingest, false);

  InputArgs label;
  auto* s_label = app.add_subcommand("label", "Write maneuver labels and target offsets per window");
  add_input(s_label, label, true);

  InputArgs train;
  auto* s_train = app.add_subcommand("train", "Train classifier and regressor");
  add_input(s_train, train, true);

  InputArgs predict_in;
  ModelArgs predict_models;
  auto* s_predict = app.add_subcommand("predict", "Predict maneuvers and positions for windows");
  add_input(s_predict, predict_in, true);
  s_predict->add_option("--models", predict_models.models, "Directory with classifier.stcp and regressor.stcp")
      ->required();

  InputArgs eval_in;
  ModelArgs eval_models;
  auto* s_eval = app.add_subcommand("eval", "Evaluate trained models on the test split");
  add_input(s_eval, eval_in, true);
  s_eval->add_option("--models", eval_models.models, "Directory with classifier.stcp and regressor.stcp")->required();
  s_eval->add_option("--report-format", eval_models.report_format, "csv or json")->capture_default_str();

  InputArgs ablate_in;
  AblateArgs ablate;
  auto* s_ablate = app.add_subcommand("ablate", "Retrain and evaluate ablation variants");
  add_input(s_ablate, ablate_in, true);
  s_ablate->add_option("--variant", ablate.variant, "Variant name or 'all'")->capture_default_str();

  InputArgs edit_in;
  EditArgs edit;
  auto* s_edit = app.add_subcommand("edit-scene", "Delete one vehicle from a trajectory table");
  add_input(s_edit, edit_in, false);
  s_edit->add_option("--remove", edit.remove, "Vehicle id to delete")->required();

  InspectArgs inspect;
  auto* s_inspect = app.add_subcommand("inspect", "Print architecture shapes and parameter counts");
  s_inspect->add_option("--model", inspect.model, "Model file to describe");
  s_inspect->add_option("--variant", inspect.variant, "Ablation variant")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "lanecast: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*s_synth) return run_synth(g, synth);
    if (*s_ingest) return run_ingest(g, ingest);
    if (*s_label) return run_label(g, label);
    if (*s_train) return run_train(g, train);
    if (*s_predict) return run_predict(g, predict_in, predict_models);
    if (*s_eval) return run_eval(g, eval_in, eval_models);
    if (*s_ablate) return run_ablate(g, ablate_in, ablate);
    if (*s_edit) return run_edit(g, edit_in, edit);
    if (*s_inspect) return run_inspect(g, inspect);
  } catch (const std::exception& e) {
    std::cerr << "lanecast: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
