#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "levelsense/errors.hpp"
#include "levelsense/sim.hpp"

namespace levelsense {

namespace {

using json = nlohmann::json;

// Config parsing is strict: unknown keys are rejected so typos surface as
// usage errors instead of silently falling back to defaults.
void check_keys(const json& obj, const char* what,
                const std::set<std::string>& allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key))
      raise(ErrorCode::config_error,
            std::string(what) + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    raise(ErrorCode::config_error,
          std::string("field '") + key + "' has the wrong type");
  }
}

json parse_text(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    raise(ErrorCode::config_error,
          std::string(what) + " is not valid JSON: " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::io_error, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ChirpConfig chirp_from_json(const json& obj) {
  check_keys(obj, "chirp",
             {"f_start_hz", "f_end_hz", "duration_s", "amplitude",
              "initial_phase_rad"});
  ChirpConfig c;
  c.f_start_hz = get_or(obj, "f_start_hz", c.f_start_hz);
  c.f_end_hz = get_or(obj, "f_end_hz", c.f_end_hz);
  c.duration_s = get_or(obj, "duration_s", c.duration_s);
  c.amplitude = get_or(obj, "amplitude", c.amplitude);
  c.initial_phase_rad = get_or(obj, "initial_phase_rad", c.initial_phase_rad);
  return c;
}

json chirp_to_json(const ChirpConfig& c) {
  return json{{"f_start_hz", c.f_start_hz},
              {"f_end_hz", c.f_end_hz},
              {"duration_s", c.duration_s},
              {"amplitude", c.amplitude},
              {"initial_phase_rad", c.initial_phase_rad}};
}

}  // namespace

SceneConfig parse_scene_json(const std::string& text) {
  json obj = parse_text(text, "scene config");
  if (!obj.is_object())
    raise(ErrorCode::config_error, "scene config must be a JSON object");
  check_keys(obj, "scene",
             {"n_rx", "n_subcarriers", "carrier_wavelength_m",
              "antenna_spacing_m", "chirp", "bidirectional", "padding_s",
              "vibration", "paths", "noise_std", "clock"});
  SceneConfig scene;
  scene.n_rx = get_or<std::uint16_t>(obj, "n_rx", scene.n_rx);
  scene.n_subcarriers =
      get_or<std::uint16_t>(obj, "n_subcarriers", scene.n_subcarriers);
  scene.carrier_wavelength_m =
      get_or(obj, "carrier_wavelength_m", scene.carrier_wavelength_m);
  scene.antenna_spacing_m =
      get_or(obj, "antenna_spacing_m", scene.antenna_spacing_m);
  if (obj.contains("chirp")) scene.chirp = chirp_from_json(obj.at("chirp"));
  scene.bidirectional = get_or(obj, "bidirectional", scene.bidirectional);
  scene.padding_s = get_or(obj, "padding_s", scene.padding_s);
  scene.noise_std = get_or(obj, "noise_std", scene.noise_std);

  if (obj.contains("vibration")) {
    const json& v = obj.at("vibration");
    check_keys(v, "vibration",
               {"resonance_hz", "damping_hz", "peak_displacement_m",
                "response_lag_s", "second_mode"});
    scene.vibration.resonance_hz =
        get_or(v, "resonance_hz", scene.vibration.resonance_hz);
    scene.vibration.damping_hz =
        get_or(v, "damping_hz", scene.vibration.damping_hz);
    scene.vibration.peak_displacement_m =
        get_or(v, "peak_displacement_m", scene.vibration.peak_displacement_m);
    scene.vibration.response_lag_s =
        get_or(v, "response_lag_s", scene.vibration.response_lag_s);
    scene.vibration.second_mode =
        get_or(v, "second_mode", scene.vibration.second_mode);
  }

  if (!obj.contains("paths") || !obj.at("paths").is_array())
    raise(ErrorCode::config_error, "scene needs a 'paths' array");
  for (const json& p : obj.at("paths")) {
    check_keys(p, "path",
               {"length_m", "attenuation", "dynamic", "incidence_rad",
                "reflection_rad", "arrival_cos", "antenna_gains"});
    PathSpec path;
    path.length_m = get_or(p, "length_m", path.length_m);
    path.attenuation = get_or(p, "attenuation", path.attenuation);
    path.dynamic = get_or(p, "dynamic", path.dynamic);
    path.incidence_rad = get_or(p, "incidence_rad", path.incidence_rad);
    path.reflection_rad = get_or(p, "reflection_rad", path.reflection_rad);
    path.arrival_cos = get_or(p, "arrival_cos", path.arrival_cos);
    path.antenna_gains =
        get_or(p, "antenna_gains", std::vector<double>{});
    scene.paths.push_back(std::move(path));
  }

  if (obj.contains("clock")) {
    const json& c = obj.at("clock");
    check_keys(c, "clock",
               {"enabled", "walk_step_std_rad", "antenna_offsets_rad"});
    scene.clock.enabled = get_or(c, "enabled", scene.clock.enabled);
    scene.clock.walk_step_std_rad =
        get_or(c, "walk_step_std_rad", scene.clock.walk_step_std_rad);
    scene.clock.antenna_offsets_rad =
        get_or(c, "antenna_offsets_rad", std::vector<double>{});
  }

  validate_scene(scene);
  return scene;
}

SceneConfig load_scene_file(const std::string& path) {
  return parse_scene_json(read_file(path));
}

std::string scene_to_json(const SceneConfig& scene) {
  json obj;
  obj["n_rx"] = scene.n_rx;
  obj["n_subcarriers"] = scene.n_subcarriers;
  obj["carrier_wavelength_m"] = scene.carrier_wavelength_m;
  obj["antenna_spacing_m"] = scene.antenna_spacing_m;
  obj["chirp"] = chirp_to_json(scene.chirp);
  obj["bidirectional"] = scene.bidirectional;
  obj["padding_s"] = scene.padding_s;
  obj["vibration"] = json{
      {"resonance_hz", scene.vibration.resonance_hz},
      {"damping_hz", scene.vibration.damping_hz},
      {"peak_displacement_m", scene.vibration.peak_displacement_m},
      {"response_lag_s", scene.vibration.response_lag_s},
      {"second_mode", scene.vibration.second_mode}};
  json paths = json::array();
  for (const PathSpec& p : scene.paths) {
    json pj{{"length_m", p.length_m},
            {"attenuation", p.attenuation},
            {"dynamic", p.dynamic},
            {"incidence_rad", p.incidence_rad},
            {"reflection_rad", p.reflection_rad},
            {"arrival_cos", p.arrival_cos}};
    if (!p.antenna_gains.empty()) pj["antenna_gains"] = p.antenna_gains;
    paths.push_back(std::move(pj));
  }
  obj["paths"] = std::move(paths);
  obj["noise_std"] = scene.noise_std;
  json clock{{"enabled", scene.clock.enabled},
             {"walk_step_std_rad", scene.clock.walk_step_std_rad}};
  if (!scene.clock.antenna_offsets_rad.empty())
    clock["antenna_offsets_rad"] = scene.clock.antenna_offsets_rad;
  obj["clock"] = std::move(clock);
  return obj.dump(2) + "\n";
}

GroundTruthCurve parse_curve_json(const std::string& text) {
  json obj = parse_text(text, "ground-truth curve");
  if (!obj.is_object())
    raise(ErrorCode::config_error, "curve config must be a JSON object");
  check_keys(obj, "curve",
             {"capacity_ml", "freq_min_hz", "freq_max_hz", "knots"});
  GroundTruthCurve curve;
  curve.capacity_ml = get_or(obj, "capacity_ml", curve.capacity_ml);
  curve.freq_min_hz = get_or(obj, "freq_min_hz", curve.freq_min_hz);
  curve.freq_max_hz = get_or(obj, "freq_max_hz", curve.freq_max_hz);
  if (!obj.contains("knots") || !obj.at("knots").is_array())
    raise(ErrorCode::config_error, "curve needs a 'knots' array");
  for (const json& k : obj.at("knots")) {
    check_keys(k, "curve knot", {"level_ml", "resonance_hz"});
    if (!k.contains("level_ml") || !k.contains("resonance_hz"))
      raise(ErrorCode::config_error,
            "curve knots need level_ml and resonance_hz");
    curve.knot_levels_ml.push_back(k.at("level_ml").get<double>());
    curve.knot_freqs_hz.push_back(k.at("resonance_hz").get<double>());
  }
  validate_curve(curve);
  return curve;
}

GroundTruthCurve load_curve_file(const std::string& path) {
  return parse_curve_json(read_file(path));
}

std::string curve_to_json(const GroundTruthCurve& curve) {
  json obj;
  obj["capacity_ml"] = curve.capacity_ml;
  obj["freq_min_hz"] = curve.freq_min_hz;
  obj["freq_max_hz"] = curve.freq_max_hz;
  json knots = json::array();
  for (std::size_t i = 0; i < curve.knot_levels_ml.size(); ++i)
    knots.push_back(json{{"level_ml", curve.knot_levels_ml[i]},
                         {"resonance_hz", curve.knot_freqs_hz[i]}});
  obj["knots"] = std::move(knots);
  return obj.dump(2) + "\n";
}

}  // namespace levelsense
