#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "levelsense/classifier.hpp"
#include "levelsense/dataset.hpp"
#include "levelsense/errors.hpp"
#include "levelsense/eval.hpp"
#include "levelsense/model_io.hpp"
#include "levelsense/pipeline.hpp"
#include "levelsense/sim.hpp"
#include "levelsense/spline.hpp"
#include "levelsense/trace_io.hpp"

namespace fs = std::filesystem;
namespace ls = levelsense;
using nlohmann::json;

namespace {

// Built-in demo scene, also shipped as configs/default_scene.json. One
// line-of-sight path, one reflection off the container surface, one clutter
// path, arriving from distinct directions.
ls::SceneConfig default_scene() {
  ls::SceneConfig scene;
  scene.padding_s = 2.0;
  scene.noise_std = 0.005;

  ls::PathSpec los;
  los.length_m = 2.0;
  los.attenuation = 1.0;
  los.arrival_cos = 0.0;

  ls::PathSpec surface;
  surface.length_m = 2.4;
  surface.attenuation = 0.6;
  surface.dynamic = true;
  surface.incidence_rad = 0.32;
  surface.reflection_rad = 0.32;
  surface.arrival_cos = 0.5;

  ls::PathSpec clutter;
  clutter.length_m = 3.1;
  clutter.attenuation = 0.4;
  clutter.arrival_cos = -0.5;

  scene.paths = {los, surface, clutter};
  return scene;
}

ls::GroundTruthCurve default_curve() {
  ls::GroundTruthCurve curve;
  curve.knot_levels_ml = {0.0, 1800.0};
  curve.knot_freqs_hz = {900.0, 300.0};
  return curve;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ls::raise(ls::ErrorCode::io_error, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    ls::raise(ls::ErrorCode::malformed_input, path + ": " + e.what());
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    ls::raise(ls::ErrorCode::io_error, "cannot open " + path + " for writing");
  out << text;
  if (!out) ls::raise(ls::ErrorCode::io_error, "short write to " + path);
}

double meta_double(const ls::CsiTrace& trace, const std::string& key,
                   double fallback) {
  auto it = trace.metadata.find(key);
  if (it == trace.metadata.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    ls::raise(ls::ErrorCode::malformed_input,
              "trace metadata key '" + key + "' is not a number: '" +
                  it->second + "'");
  }
}

// Scene parameter overrides shared by simulate and dataset.
struct SceneOverrides {
  double resonance = 0.0, noise = 0.0, lag = 0.0, padding = 0.0;
  bool no_clock = false, second_mode = false;
  CLI::Option *resonance_opt = nullptr, *noise_opt = nullptr,
              *lag_opt = nullptr, *padding_opt = nullptr;

  void attach(CLI::App* cmd) {
    resonance_opt = cmd->add_option("--resonance", resonance,
                                    "Surface resonance frequency [Hz]");
    noise_opt = cmd->add_option("--noise", noise,
                                "Complex sample noise std deviation");
    lag_opt = cmd->add_option("--lag", lag, "Surface response lag [s]");
    padding_opt = cmd->add_option("--padding", padding,
                                  "Leading silence before the sweep [s]");
    cmd->add_flag("--no-clock", no_clock,
                  "Disable clock walk and static phase offsets");
    cmd->add_flag("--second-mode", second_mode,
                  "Add the weaker high-frequency surface mode");
  }

  void apply(ls::SceneConfig& scene) const {
    if (resonance_opt->count() > 0) scene.vibration.resonance_hz = resonance;
    if (noise_opt->count() > 0) scene.noise_std = noise;
    if (lag_opt->count() > 0) scene.vibration.response_lag_s = lag;
    if (padding_opt->count() > 0) scene.padding_s = padding;
    if (no_clock) scene.clock.enabled = false;
    if (second_mode) scene.vibration.second_mode = true;
  }
};

// Processing parameters shared by process and spectrogram. Sweep shape and
// padding fall back to the trace's own metadata when the flag is not given.
struct ProcessOptions {
  double f_start = 0.0, f_end = 1000.0, sweep_s = 15.0, padding_s = 0.0;
  double cutoff = 100.0, edge_trim = 0.25, threshold_divisor = 3.0;
  double min_spacing = 200.0, band_min = 100.0, crosscheck = 2.0;
  int window = 2048, overlap = 2000;
  std::pair<int, int> pair{0, 0};
  CLI::Option *f_start_opt = nullptr, *f_end_opt = nullptr,
              *sweep_opt = nullptr, *padding_opt = nullptr,
              *pair_opt = nullptr;

  void attach(CLI::App* cmd) {
    f_start_opt = cmd->add_option("--f-start", f_start,
                                  "Sweep start frequency [Hz]");
    f_end_opt = cmd->add_option("--f-end", f_end, "Sweep end frequency [Hz]");
    sweep_opt = cmd->add_option("--sweep", sweep_s, "Sweep duration [s]");
    padding_opt = cmd->add_option("--padding", padding_s,
                                  "Leading silence in the trace [s]");
    cmd->add_option("--cutoff", cutoff, "High-pass cutoff [Hz]")->capture_default_str();
    cmd->add_option("--window", window, "STFT window length [samples]")->capture_default_str();
    cmd->add_option("--overlap", overlap, "STFT window overlap [samples]")->capture_default_str();
    cmd->add_option("--edge-trim", edge_trim,
                    "Series edge to exclude from statistics [s]")->capture_default_str();
    cmd->add_option("--threshold-divisor", threshold_divisor,
                    "Peaks must reach band max / divisor")->capture_default_str();
    cmd->add_option("--min-spacing", min_spacing,
                    "Minimum spacing between kept peaks [Hz]")->capture_default_str();
    cmd->add_option("--band-min", band_min,
                    "Lowest frequency searched for peaks [Hz]")->capture_default_str();
    cmd->add_option("--crosscheck", crosscheck,
                    "Allowed distance, in bins, between averaged-spectrum "
                    "peak and strongest cell")->capture_default_str();
    pair_opt = cmd->add_option("--pair", pair,
                               "Fixed antenna pair, bypassing selection");
  }

  ls::PipelineConfig config_for(const ls::CsiTrace& trace) const {
    ls::PipelineConfig cfg;
    cfg.chirp.f_start_hz = f_start_opt->count() > 0
                               ? f_start
                               : meta_double(trace, "sweep_f_start_hz", f_start);
    cfg.chirp.f_end_hz = f_end_opt->count() > 0
                             ? f_end
                             : meta_double(trace, "sweep_f_end_hz", f_end);
    cfg.chirp.duration_s = sweep_opt->count() > 0
                               ? sweep_s
                               : meta_double(trace, "sweep_duration_s", sweep_s);
    cfg.padding_s = padding_opt->count() > 0
                        ? padding_s
                        : meta_double(trace, "padding_s", padding_s);
    cfg.highpass_cutoff_hz = cutoff;
    cfg.stft.window_len = window;
    cfg.stft.overlap = overlap;
    cfg.peaks.threshold_divisor = threshold_divisor;
    cfg.peaks.min_spacing_hz = min_spacing;
    cfg.peaks.band_min_hz = band_min;
    cfg.crosscheck_bins = crosscheck;
    cfg.edge_trim_s = edge_trim;
    if (pair_opt->count() > 0) cfg.fixed_pair = pair;

    auto sweeps = trace.metadata.find("sweeps");
    if (sweeps != trace.metadata.end() && sweeps->second == "up")
      ls::raise(ls::ErrorCode::mode_mismatch,
                "trace records a single sweep; processing needs a "
                "bidirectional session");
    return cfg;
  }
};

struct EstimateRow {
  std::string path;
  bool ok = true;
  std::string error;
  ls::ResonanceEstimate estimate;
  int antenna_l = 0, antenna_s = 0;
  double explained_variance_ratio = 0.0;
  std::vector<std::string> warnings;
  std::optional<double> level_ml;
  std::optional<int> level_class;
  std::optional<double> resonance_hz;
};

json row_to_json(const EstimateRow& row) {
  json j;
  j["path"] = row.path;
  j["status"] = row.ok ? "ok" : "no_peak";
  if (row.ok) {
    j["f_up_hz"] = row.estimate.f_up_hz;
    j["f_down_hz"] = row.estimate.f_down_hz;
    j["f_resonance_hz"] = row.estimate.f_resonance_hz;
    j["peak_power_up"] = row.estimate.peak_power_up;
    j["peak_power_down"] = row.estimate.peak_power_down;
    j["quality"] = row.estimate.quality;
    j["antenna_l"] = row.antenna_l;
    j["antenna_s"] = row.antenna_s;
    j["explained_variance_ratio"] = row.explained_variance_ratio;
    j["warnings"] = row.warnings;
  } else {
    j["error"] = row.error;
  }
  if (row.level_ml) j["level_ml"] = *row.level_ml;
  if (row.level_class) j["level_class"] = *row.level_class;
  if (row.resonance_hz) j["resonance_hz"] = *row.resonance_hz;
  return j;
}

struct EstimatesFile {
  std::optional<double> capacity_ml;
  std::vector<EstimateRow> rows;
  int skipped = 0;  // non-ok entries dropped while reading
};

EstimatesFile read_estimates(const std::string& path) {
  json j = load_json_file(path);
  if (!j.is_object() || j.value("type", "") != "estimates")
    ls::raise(ls::ErrorCode::malformed_input,
              path + " is not an estimates file");
  EstimatesFile file;
  if (j.contains("capacity_ml"))
    file.capacity_ml = j.at("capacity_ml").get<double>();
  for (const json& e : j.at("entries")) {
    if (e.value("status", "ok") != "ok") {
      ++file.skipped;
      continue;
    }
    EstimateRow row;
    row.path = e.value("path", "");
    row.estimate.f_up_hz = e.at("f_up_hz").get<double>();
    row.estimate.f_down_hz = e.at("f_down_hz").get<double>();
    row.estimate.f_resonance_hz = e.at("f_resonance_hz").get<double>();
    row.estimate.peak_power_up = e.value("peak_power_up", 0.0);
    row.estimate.peak_power_down = e.value("peak_power_down", 0.0);
    row.estimate.quality = e.value("quality", 0.0);
    row.antenna_l = e.value("antenna_l", 0);
    row.antenna_s = e.value("antenna_s", 0);
    row.explained_variance_ratio = e.value("explained_variance_ratio", 0.0);
    if (e.contains("warnings"))
      row.warnings = e.at("warnings").get<std::vector<std::string>>();
    if (e.contains("level_ml")) row.level_ml = e.at("level_ml").get<double>();
    if (e.contains("level_class"))
      row.level_class = e.at("level_class").get<int>();
    if (e.contains("resonance_hz"))
      row.resonance_hz = e.at("resonance_hz").get<double>();
    file.rows.push_back(std::move(row));
  }
  return file;
}

std::string estimates_to_text(const EstimatesFile& file) {
  json j;
  j["type"] = "estimates";
  j["version"] = 1;
  if (file.capacity_ml) j["capacity_ml"] = *file.capacity_ml;
  json entries = json::array();
  for (const EstimateRow& row : file.rows) entries.push_back(row_to_json(row));
  j["entries"] = std::move(entries);
  return j.dump(2) + "\n";
}

// Classes for splitting: explicit level_class when present on every row,
// otherwise ranks of the distinct level_ml values.
std::vector<int> row_classes(const std::vector<EstimateRow>& rows) {
  bool all_class = true, all_level = true;
  for (const EstimateRow& r : rows) {
    all_class = all_class && r.level_class.has_value();
    all_level = all_level && r.level_ml.has_value();
  }
  std::vector<int> classes;
  if (all_class) {
    for (const EstimateRow& r : rows) classes.push_back(*r.level_class);
    return classes;
  }
  if (!all_level)
    ls::raise(ls::ErrorCode::insufficient_data,
              "estimates carry no level labels; reprocess from a dataset "
              "manifest");
  std::vector<double> distinct;
  for (const EstimateRow& r : rows) distinct.push_back(*r.level_ml);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()),
                 distinct.end());
  for (const EstimateRow& r : rows) {
    auto it = std::lower_bound(distinct.begin(), distinct.end(), *r.level_ml);
    classes.push_back(static_cast<int>(it - distinct.begin()) + 1);
  }
  return classes;
}

void register_simulate(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "simulate", "Synthesize one excitation session as a trace file");
  auto scene_path = std::make_shared<std::string>();
  auto curve_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  auto seed = std::make_shared<std::uint64_t>(1);
  auto packet_rate = std::make_shared<double>(2000.0);
  auto level = std::make_shared<double>(0.0);
  auto overrides = std::make_shared<SceneOverrides>();
  auto json_out = std::make_shared<bool>(false);

  cmd->add_option("--scene", *scene_path, "Scene config JSON")
      ->check(CLI::ExistingFile);
  auto* level_opt =
      cmd->add_option("--level", *level,
                      "Fill level [ml]; resonance looked up on the curve");
  cmd->add_option("--curve", *curve_path, "Level-to-frequency curve JSON")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", *out_path, "Output trace path (.csit or .jsonl)")
      ->required();
  cmd->add_option("--seed", *seed, "Deterministic seed")->capture_default_str();
  cmd->add_option("--packet-rate", *packet_rate, "Sampling rate [Hz]")->capture_default_str();
  overrides->attach(cmd);
  cmd->add_flag("--json", *json_out, "Print a JSON summary");
  level_opt->excludes(overrides->resonance_opt);

  cmd->callback([=]() {
    ls::SceneConfig scene = scene_path->empty()
                                ? default_scene()
                                : ls::load_scene_file(*scene_path);
    overrides->apply(scene);
    std::optional<double> level_ml;
    if (level_opt->count() > 0) {
      ls::GroundTruthCurve curve = curve_path->empty()
                                       ? default_curve()
                                       : ls::load_curve_file(*curve_path);
      scene.vibration.resonance_hz = ls::curve_frequency(curve, *level);
      level_ml = *level;
    }
    ls::CsiTrace trace = ls::synth_trace(scene, *packet_rate, *seed);
    if (level_ml) {
      json v = *level_ml;
      trace.metadata["level_ml"] = v.dump();
    }
    ls::write_trace(trace, *out_path);
    if (*json_out) {
      json j;
      j["path"] = *out_path;
      j["frames"] = trace.frames.size();
      j["duration_s"] = trace.duration_s();
      j["packet_rate_hz"] = trace.packet_rate_hz;
      j["resonance_hz"] = scene.vibration.resonance_hz;
      j["seed"] = *seed;
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "wrote " << trace.frames.size() << " frames ("
                << trace.duration_s() << " s, resonance "
                << scene.vibration.resonance_hz << " Hz) to " << *out_path
                << "\n";
    }
  });
}

void register_dataset(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "dataset", "Synthesize a labeled multi-level trace collection");
  auto scene_path = std::make_shared<std::string>();
  auto curve_path = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>();
  auto seed = std::make_shared<std::uint64_t>(1);
  auto packet_rate = std::make_shared<double>(2000.0);
  auto n_levels = std::make_shared<int>(10);
  auto sweeps = std::make_shared<int>(10);
  auto format = std::make_shared<std::string>("csit");
  auto overrides = std::make_shared<SceneOverrides>();
  auto json_out = std::make_shared<bool>(false);

  cmd->add_option("--scene", *scene_path, "Scene config JSON")
      ->check(CLI::ExistingFile);
  cmd->add_option("--curve", *curve_path, "Level-to-frequency curve JSON")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", *out_dir, "Directory for traces and manifest")
      ->required();
  cmd->add_option("--levels", *n_levels, "Number of evenly spaced levels")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--sweeps", *sweeps, "Sessions per level")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", *seed, "Deterministic seed")->capture_default_str();
  cmd->add_option("--packet-rate", *packet_rate, "Sampling rate [Hz]")->capture_default_str();
  cmd->add_option("--format", *format, "Trace encoding")->capture_default_str()
      ->check(CLI::IsMember({"csit", "jsonl"}));
  overrides->attach(cmd);
  cmd->add_flag("--json", *json_out, "Print a JSON summary");

  cmd->callback([=]() {
    ls::SceneConfig scene = scene_path->empty()
                                ? default_scene()
                                : ls::load_scene_file(*scene_path);
    overrides->apply(scene);
    ls::GroundTruthCurve curve = curve_path->empty()
                                     ? default_curve()
                                     : ls::load_curve_file(*curve_path);
    std::vector<double> levels;
    for (int i = 1; i <= *n_levels; ++i)
      levels.push_back(curve.capacity_ml * i / *n_levels);

    std::vector<ls::LabeledTrace> dataset =
        ls::synth_dataset(curve, scene, *packet_rate, levels, *sweeps, *seed);

    fs::create_directories(*out_dir);
    json entries = json::array();
    std::map<int, int> sweep_counter;
    for (const ls::LabeledTrace& labeled : dataset) {
      int s = ++sweep_counter[labeled.level_class];
      char name[64];
      std::snprintf(name, sizeof(name), "level%02d_sweep%02d.%s",
                    labeled.level_class, s, format->c_str());
      fs::path path = fs::path(*out_dir) / name;
      ls::write_trace(labeled.trace, path.string());
      json e;
      e["path"] = name;
      e["level_ml"] = labeled.level_ml;
      e["level_class"] = labeled.level_class;
      e["resonance_hz"] = labeled.resonance_hz;
      entries.push_back(std::move(e));
    }

    json manifest;
    manifest["type"] = "dataset_manifest";
    manifest["version"] = 1;
    manifest["capacity_ml"] = curve.capacity_ml;
    manifest["packet_rate_hz"] = *packet_rate;
    manifest["seed"] = *seed;
    manifest["curve"] = json::parse(ls::curve_to_json(curve));
    manifest["scene"] = json::parse(ls::scene_to_json(scene));
    manifest["entries"] = std::move(entries);
    fs::path manifest_path = fs::path(*out_dir) / "manifest.json";
    write_output(manifest_path.string(), manifest.dump(2) + "\n");

    if (*json_out) {
      json j;
      j["out_dir"] = *out_dir;
      j["traces"] = dataset.size();
      j["manifest"] = manifest_path.string();
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "wrote " << dataset.size() << " traces and manifest to "
                << *out_dir << "\n";
    }
  });
}

void register_process(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "process", "Estimate resonance frequencies from trace files");
  auto inputs = std::make_shared<std::vector<std::string>>();
  auto manifest_path = std::make_shared<std::string>();
  auto baseline_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>("-");
  auto opts = std::make_shared<ProcessOptions>();

  auto* inputs_opt =
      cmd->add_option("traces", *inputs, "Trace files to process");
  auto* manifest_opt =
      cmd->add_option("--manifest", *manifest_path,
                      "Dataset manifest; processes every entry")
          ->check(CLI::ExistingFile);
  inputs_opt->excludes(manifest_opt);
  cmd->add_option("--baseline", *baseline_path,
                  "No-excitation capture for background subtraction")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", *out_path, "Estimates JSON path, - for stdout")->capture_default_str();
  opts->attach(cmd);

  cmd->callback([=]() {
    struct Item {
      std::string path;
      std::optional<double> level_ml;
      std::optional<int> level_class;
      std::optional<double> resonance_hz;
    };
    std::vector<Item> items;
    EstimatesFile out;

    if (!manifest_path->empty()) {
      json manifest = load_json_file(*manifest_path);
      if (manifest.value("type", "") != "dataset_manifest")
        ls::raise(ls::ErrorCode::malformed_input,
                  *manifest_path + " is not a dataset manifest");
      if (manifest.contains("capacity_ml"))
        out.capacity_ml = manifest.at("capacity_ml").get<double>();
      fs::path dir = fs::path(*manifest_path).parent_path();
      for (const json& e : manifest.at("entries")) {
        Item item;
        item.path = (dir / e.at("path").get<std::string>()).string();
        if (e.contains("level_ml"))
          item.level_ml = e.at("level_ml").get<double>();
        if (e.contains("level_class"))
          item.level_class = e.at("level_class").get<int>();
        if (e.contains("resonance_hz"))
          item.resonance_hz = e.at("resonance_hz").get<double>();
        items.push_back(std::move(item));
      }
    } else {
      if (inputs->empty())
        ls::raise(ls::ErrorCode::config_error,
                  "no traces given; pass files or --manifest");
      for (const std::string& path : *inputs) items.push_back({path, {}, {}, {}});
    }

    std::optional<ls::CsiTrace> baseline;
    if (!baseline_path->empty()) baseline = ls::read_trace(*baseline_path);

    int failed = 0;
    for (const Item& item : items) {
      ls::CsiTrace trace = ls::read_trace(item.path);
      EstimateRow row;
      row.path = item.path;
      row.level_ml = item.level_ml;
      row.level_class = item.level_class;
      row.resonance_hz = item.resonance_hz;
      if (!row.level_ml && trace.metadata.count("level_ml"))
        row.level_ml = meta_double(trace, "level_ml", 0.0);
      if (!row.level_class && trace.metadata.count("level_class"))
        row.level_class =
            static_cast<int>(meta_double(trace, "level_class", 0.0));
      if (!row.resonance_hz && trace.metadata.count("resonance_hz"))
        row.resonance_hz = meta_double(trace, "resonance_hz", 0.0);
      try {
        ls::PipelineConfig cfg = opts->config_for(trace);
        ls::PipelineResult result =
            ls::run_pipeline(trace, cfg, baseline ? &*baseline : nullptr);
        row.estimate = result.estimate;
        row.antenna_l = result.antenna_l;
        row.antenna_s = result.antenna_s;
        row.explained_variance_ratio = result.explained_variance_ratio;
        row.warnings = result.warnings;
      } catch (const ls::Error& err) {
        if (err.code() != ls::ErrorCode::no_peak) throw;
        row.ok = false;
        row.error = err.what();
        ++failed;
        std::cerr << item.path << ": no peak found, recorded and skipped\n";
      }
      out.rows.push_back(std::move(row));
    }
    write_output(*out_path, estimates_to_text(out));
    if (*out_path != "-" && failed > 0)
      std::cerr << failed << " of " << items.size()
                << " traces yielded no peak\n";
  });
}

void register_train(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "train", "Fit a level model from labeled resonance estimates");
  auto estimates_path = std::make_shared<std::string>();
  auto mode = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  auto test_out = std::make_shared<std::string>();
  auto split = std::make_shared<std::string>("none");
  auto seed = std::make_shared<std::uint64_t>(1);
  auto capacity = std::make_shared<double>(0.0);
  auto ends = std::make_shared<std::string>("natural");
  auto json_out = std::make_shared<bool>(false);

  cmd->add_option("--estimates", *estimates_path, "Estimates JSON from process")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--mode", *mode, "Model kind")
      ->required()
      ->check(CLI::IsMember({"spline", "classifier"}));
  cmd->add_option("--out", *out_path, "Model JSON path")->required();
  cmd->add_option("--split", *split, "Train/test split")->capture_default_str()
      ->check(CLI::IsMember({"none", "interleaved-levels", "half-per-class"}));
  cmd->add_option("--test-out", *test_out,
                  "Write held-out estimates here (with --split)");
  cmd->add_option("--seed", *seed, "Seed for the half split")->capture_default_str();
  auto* capacity_opt = cmd->add_option(
      "--capacity", *capacity, "Container capacity [ml], for spline models");
  cmd->add_option("--ends", *ends, "Spline end conditions")->capture_default_str()
      ->check(CLI::IsMember({"natural", "clamped"}));
  cmd->add_flag("--json", *json_out, "Print a JSON summary");

  cmd->callback([=]() {
    EstimatesFile file = read_estimates(*estimates_path);
    if (file.rows.empty())
      ls::raise(ls::ErrorCode::insufficient_data, "estimates file is empty");

    std::vector<std::size_t> train_idx, test_idx;
    if (*split == "none") {
      for (std::size_t i = 0; i < file.rows.size(); ++i) train_idx.push_back(i);
    } else {
      std::vector<int> classes = row_classes(file.rows);
      ls::SplitIndices indices = *split == "interleaved-levels"
                                     ? ls::split_by_level(classes)
                                     : ls::split_half_per_class(classes, *seed);
      train_idx = std::move(indices.train);
      test_idx = std::move(indices.test);
    }

    json summary;
    summary["mode"] = *mode;
    summary["model"] = *out_path;
    summary["train_samples"] = train_idx.size();
    summary["test_samples"] = test_idx.size();

    if (*mode == "spline") {
      double cap = 0.0;
      if (capacity_opt->count() > 0)
        cap = *capacity;
      else if (file.capacity_ml)
        cap = *file.capacity_ml;
      else
        ls::raise(ls::ErrorCode::config_error,
                  "capacity unknown; pass --capacity");
      std::vector<double> freqs, levels;
      for (std::size_t i : train_idx) {
        const EstimateRow& row = file.rows[i];
        if (!row.level_ml)
          ls::raise(ls::ErrorCode::insufficient_data,
                    "entry '" + row.path + "' lacks level_ml");
        freqs.push_back(row.estimate.f_resonance_hz);
        levels.push_back(*row.level_ml);
      }
      std::vector<double> mean_freqs, mean_levels;
      ls::average_per_level(freqs, levels, mean_freqs, mean_levels);
      ls::SplineFitOptions fit_opts;
      fit_opts.ends = *ends == "natural" ? ls::SplineEnds::natural
                                         : ls::SplineEnds::clamped;
      ls::SplineModel model =
          ls::fit_spline(mean_freqs, mean_levels, cap, fit_opts);
      ls::save_model(model, *out_path);
      summary["knots"] = model.knots_hz.size();
      summary["capacity_ml"] = cap;
    } else {
      Eigen::MatrixXd features(train_idx.size(), 1);
      std::vector<int> labels;
      std::vector<int> classes = row_classes(file.rows);
      for (std::size_t r = 0; r < train_idx.size(); ++r) {
        const EstimateRow& row = file.rows[train_idx[r]];
        features(static_cast<Eigen::Index>(r), 0) =
            row.estimate.f_resonance_hz;
        labels.push_back(classes[train_idx[r]]);
      }
      ls::ClassifierModel model = ls::train_classifier(features, labels);
      ls::save_model(model, *out_path);
      summary["classes"] = model.classes.size();
      summary["chosen_c"] = model.chosen_c;
    }

    if (!test_out->empty()) {
      EstimatesFile held;
      held.capacity_ml = file.capacity_ml;
      for (std::size_t i : test_idx) held.rows.push_back(file.rows[i]);
      write_output(*test_out, estimates_to_text(held));
      summary["test_estimates"] = *test_out;
    }

    if (*json_out)
      std::cout << summary.dump(2) << "\n";
    else
      std::cout << *mode << " model from " << train_idx.size()
                << " samples -> " << *out_path << "\n";
  });
}

void register_predict(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "predict", "Apply a trained model to resonance estimates");
  auto model_path = std::make_shared<std::string>();
  auto estimates_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>("-");
  auto resonance = std::make_shared<double>(0.0);

  cmd->add_option("--model", *model_path, "Model JSON from train")
      ->required()
      ->check(CLI::ExistingFile);
  auto* estimates_opt =
      cmd->add_option("--estimates", *estimates_path,
                      "Estimates JSON from process")
          ->check(CLI::ExistingFile);
  auto* resonance_opt = cmd->add_option("--resonance", *resonance,
                                        "Single resonance frequency [Hz]");
  estimates_opt->excludes(resonance_opt);
  cmd->add_option("--out", *out_path, "Predictions JSON path, - for stdout")->capture_default_str();

  cmd->callback([=]() {
    ls::AnyModel any = ls::load_model(*model_path);
    json out;
    out["type"] = "predictions";
    out["version"] = 1;
    json entries = json::array();

    if (std::holds_alternative<ls::SplineModel>(any)) {
      const auto& model = std::get<ls::SplineModel>(any);
      out["mode"] = "continuous";
      out["capacity_ml"] = model.capacity_ml;
      auto add = [&](const std::string& path, double freq,
                     std::optional<double> truth) {
        ls::LevelPrediction p = ls::predict_continuous(model, freq);
        json e;
        if (!path.empty()) e["path"] = path;
        e["f_resonance_hz"] = freq;
        e["predicted_ml"] = p.level_ml;
        e["out_of_range"] = p.out_of_range;
        if (truth) e["level_ml"] = *truth;
        entries.push_back(std::move(e));
      };
      if (estimates_opt->count() > 0) {
        EstimatesFile file = read_estimates(*estimates_path);
        for (const EstimateRow& row : file.rows)
          add(row.path, row.estimate.f_resonance_hz, row.level_ml);
      } else if (resonance_opt->count() > 0) {
        add("", *resonance, {});
      } else {
        ls::raise(ls::ErrorCode::config_error,
                  "pass --estimates or --resonance");
      }
    } else {
      const auto& model = std::get<ls::ClassifierModel>(any);
      out["mode"] = "discrete";
      auto add = [&](const std::string& path, double freq,
                     std::optional<int> truth) {
        Eigen::VectorXd x(1);
        x << freq;
        json e;
        if (!path.empty()) e["path"] = path;
        e["f_resonance_hz"] = freq;
        e["predicted_class"] = ls::predict_discrete(model, x);
        if (truth) e["level_class"] = *truth;
        entries.push_back(std::move(e));
      };
      if (estimates_opt->count() > 0) {
        EstimatesFile file = read_estimates(*estimates_path);
        for (const EstimateRow& row : file.rows)
          add(row.path, row.estimate.f_resonance_hz, row.level_class);
      } else if (resonance_opt->count() > 0) {
        add("", *resonance, {});
      } else {
        ls::raise(ls::ErrorCode::config_error,
                  "pass --estimates or --resonance");
      }
    }
    out["entries"] = std::move(entries);
    write_output(*out_path, out.dump(2) + "\n");
  });
}

void register_evaluate(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "evaluate", "Score predictions against their recorded truth");
  auto predictions_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  auto json_out = std::make_shared<bool>(false);

  cmd->add_option("--predictions", *predictions_path,
                  "Predictions JSON from predict")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", *out_path, "Also write the report JSON here");
  cmd->add_flag("--json", *json_out, "Print the report as JSON");

  cmd->callback([=]() {
    json j = load_json_file(*predictions_path);
    if (j.value("type", "") != "predictions")
      ls::raise(ls::ErrorCode::malformed_input,
                *predictions_path + " is not a predictions file");
    std::string mode = j.value("mode", "");
    ls::EvalReport report;
    if (mode == "continuous") {
      std::vector<double> predicted, truth;
      for (const json& e : j.at("entries")) {
        if (!e.contains("level_ml"))
          ls::raise(ls::ErrorCode::insufficient_data,
                    "an entry lacks level_ml truth; predictions must come "
                    "from labeled estimates");
        predicted.push_back(e.at("predicted_ml").get<double>());
        truth.push_back(e.at("level_ml").get<double>());
      }
      report.continuous = ls::evaluate_continuous(
          predicted, truth, j.at("capacity_ml").get<double>());
    } else if (mode == "discrete") {
      std::vector<int> predicted, truth;
      for (const json& e : j.at("entries")) {
        if (!e.contains("level_class"))
          ls::raise(ls::ErrorCode::insufficient_data,
                    "an entry lacks level_class truth; predictions must come "
                    "from labeled estimates");
        predicted.push_back(e.at("predicted_class").get<int>());
        truth.push_back(e.at("level_class").get<int>());
      }
      report.discrete = ls::evaluate_discrete(predicted, truth);
    } else {
      ls::raise(ls::ErrorCode::malformed_input,
                "unknown predictions mode '" + mode + "'");
    }

    if (*json_out)
      std::cout << ls::report_to_json(report);
    else
      ls::print_report(report, std::cout);
    if (!out_path->empty()) write_output(*out_path, ls::report_to_json(report));
  });
}

void register_spectrogram(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "spectrogram", "Export per-sweep spectrograms of a trace as CSV");
  auto trace_path = std::make_shared<std::string>();
  auto baseline_path = std::make_shared<std::string>();
  auto out_up = std::make_shared<std::string>();
  auto out_down = std::make_shared<std::string>();
  auto opts = std::make_shared<ProcessOptions>();

  cmd->add_option("--trace", *trace_path, "Trace file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--baseline", *baseline_path,
                  "No-excitation capture for background subtraction")
      ->check(CLI::ExistingFile);
  auto* up_opt = cmd->add_option("--out-up", *out_up, "Up-sweep CSV path");
  auto* down_opt =
      cmd->add_option("--out-down", *out_down, "Down-sweep CSV path");
  opts->attach(cmd);

  cmd->callback([=]() {
    if (up_opt->count() == 0 && down_opt->count() == 0)
      ls::raise(ls::ErrorCode::config_error,
                "pass --out-up and/or --out-down");
    ls::CsiTrace trace = ls::read_trace(*trace_path);
    ls::PipelineConfig cfg = opts->config_for(trace);
    ls::SessionComponent sc = ls::session_component(trace, cfg);

    ls::StftConfig stft_cfg = cfg.stft;
    stft_cfg.sample_rate_hz = trace.packet_rate_hz;
    ls::Spectrogram spec_up = ls::stft(
        sc.component.segment(sc.up_begin, sc.up_end - sc.up_begin), stft_cfg);
    ls::Spectrogram spec_down = ls::stft(
        sc.component.segment(sc.down_begin, sc.down_end - sc.down_begin),
        stft_cfg);

    Eigen::VectorXd quiet;
    auto trim = static_cast<std::ptrdiff_t>(
        std::llround(cfg.edge_trim_s * trace.packet_rate_hz));
    if (!baseline_path->empty()) {
      ls::CsiTrace baseline = ls::read_trace(*baseline_path);
      ls::CombinedSeries combined =
          ls::conjugate_multiply(baseline, sc.antenna_l, sc.antenna_s);
      combined.values = ls::highpass(combined.values, cfg.highpass_cutoff_hz,
                                     trace.packet_rate_hz);
      Eigen::VectorXd projected = ls::phase_series(combined) * sc.pca_weights;
      auto n_b = static_cast<std::ptrdiff_t>(projected.size());
      if (n_b - 2 * trim >= stft_cfg.window_len)
        quiet = projected.segment(trim, n_b - 2 * trim);
      else if (n_b >= stft_cfg.window_len)
        quiet = std::move(projected);
    } else if (sc.up_begin - 2 * trim >= stft_cfg.window_len) {
      quiet = sc.component.segment(trim, sc.up_begin - 2 * trim);
    }
    if (quiet.size() > 0) {
      ls::Spectrogram quiet_spec = ls::stft(quiet, stft_cfg);
      spec_up = ls::spectral_subtract(spec_up, quiet_spec);
      spec_down = ls::spectral_subtract(spec_down, quiet_spec);
    }

    if (up_opt->count() > 0) ls::write_spectrogram_csv(spec_up, *out_up);
    if (down_opt->count() > 0) ls::write_spectrogram_csv(spec_down, *out_down);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Liquid level sensing from chirp-excited wifi channel state traces"};
  app.set_version_flag("--version", "levelsense 0.1.0");
  app.require_subcommand(1);

  register_simulate(app);
  register_dataset(app);
  register_process(app);
  register_train(app);
  register_predict(app);
  register_evaluate(app);
  register_spectrogram(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const ls::Error& e) {
    std::cerr << "error (" << ls::error_code_name(e.code())
              << "): " << e.what() << "\n";
    return e.is_usage() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
