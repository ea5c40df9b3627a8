#include "levelsense/model_io.hpp"

#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "levelsense/errors.hpp"

namespace levelsense {

namespace {

using nlohmann::json;

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

json require(const json& j, const char* key) {
  if (!j.contains(key))
    raise(ErrorCode::malformed_input,
          std::string("model json missing key '") + key + "'");
  return j.at(key);
}

std::vector<double> require_doubles(const json& j, const char* key) {
  json v = require(j, key);
  if (!v.is_array())
    raise(ErrorCode::malformed_input,
          std::string("model key '") + key + "' is not an array");
  return v.get<std::vector<double>>();
}

SplineModel spline_from_json(const json& j) {
  SplineModel m;
  m.knots_hz = require_doubles(j, "knots_hz");
  m.levels_ml = require_doubles(j, "levels_ml");
  m.a = require_doubles(j, "a");
  m.b = require_doubles(j, "b");
  m.c = require_doubles(j, "c");
  m.d = require_doubles(j, "d");
  m.capacity_ml = require(j, "capacity_ml").get<double>();
  std::string ends = require(j, "ends").get<std::string>();
  if (ends == "natural")
    m.ends = SplineEnds::natural;
  else if (ends == "clamped")
    m.ends = SplineEnds::clamped;
  else
    raise(ErrorCode::malformed_input, "unknown spline ends '" + ends + "'");

  if (m.knots_hz.size() < 2 || m.levels_ml.size() != m.knots_hz.size())
    raise(ErrorCode::malformed_input, "spline knot arrays are inconsistent");
  std::size_t segments = m.knots_hz.size() - 1;
  if (m.a.size() != segments || m.b.size() != segments ||
      m.c.size() != segments || m.d.size() != segments)
    raise(ErrorCode::malformed_input,
          "spline coefficient arrays do not match the knot count");
  for (std::size_t i = 1; i < m.knots_hz.size(); ++i)
    if (!(m.knots_hz[i] > m.knots_hz[i - 1]))
      raise(ErrorCode::malformed_input, "spline knots are not increasing");
  return m;
}

ClassifierModel classifier_from_json(const json& j) {
  ClassifierModel m;
  m.classes = require(j, "classes").get<std::vector<int>>();
  m.feature_mean = to_eigen(require_doubles(j, "feature_mean"));
  m.feature_scale = to_eigen(require_doubles(j, "feature_scale"));
  m.chosen_c = require(j, "chosen_c").get<double>();

  json pairs = require(j, "pairs");
  if (!pairs.is_array())
    raise(ErrorCode::malformed_input, "classifier pairs is not an array");
  for (const json& p : pairs) {
    PairwiseFunction fn;
    fn.class_a = require(p, "class_a").get<int>();
    fn.class_b = require(p, "class_b").get<int>();
    fn.weights = to_eigen(require_doubles(p, "weights"));
    fn.bias = require(p, "bias").get<double>();
    if (fn.weights.size() != m.feature_mean.size())
      raise(ErrorCode::malformed_input,
            "pairwise weights do not match the feature width");
    m.pairs.push_back(std::move(fn));
  }

  if (m.classes.size() < 2)
    raise(ErrorCode::malformed_input, "classifier has fewer than two classes");
  if (m.pairs.size() != m.classes.size() * (m.classes.size() - 1) / 2)
    raise(ErrorCode::malformed_input,
          "classifier pair count does not match the class count");
  if (m.feature_scale.size() != m.feature_mean.size())
    raise(ErrorCode::malformed_input, "feature mean/scale lengths differ");
  return m;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::io_error, "cannot open " + path + " for writing");
  out << text;
  if (!out) raise(ErrorCode::io_error, "short write to " + path);
}

}  // namespace

std::string model_to_json(const SplineModel& model) {
  json j;
  j["type"] = "spline";
  j["version"] = kModelFormatVersion;
  j["ends"] = model.ends == SplineEnds::natural ? "natural" : "clamped";
  j["capacity_ml"] = model.capacity_ml;
  j["knots_hz"] = model.knots_hz;
  j["levels_ml"] = model.levels_ml;
  j["a"] = model.a;
  j["b"] = model.b;
  j["c"] = model.c;
  j["d"] = model.d;
  return j.dump(2) + "\n";
}

std::string model_to_json(const ClassifierModel& model) {
  json j;
  j["type"] = "classifier";
  j["version"] = kModelFormatVersion;
  j["classes"] = model.classes;
  j["chosen_c"] = model.chosen_c;
  j["feature_mean"] = to_std(model.feature_mean);
  j["feature_scale"] = to_std(model.feature_scale);
  json pairs = json::array();
  for (const PairwiseFunction& fn : model.pairs) {
    json p;
    p["class_a"] = fn.class_a;
    p["class_b"] = fn.class_b;
    p["weights"] = to_std(fn.weights);
    p["bias"] = fn.bias;
    pairs.push_back(std::move(p));
  }
  j["pairs"] = std::move(pairs);
  return j.dump(2) + "\n";
}

void save_model(const SplineModel& model, const std::string& path) {
  write_text(path, model_to_json(model));
}

void save_model(const ClassifierModel& model, const std::string& path) {
  write_text(path, model_to_json(model));
}

AnyModel parse_model_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    raise(ErrorCode::malformed_input,
          std::string("model is not valid json: ") + e.what());
  }
  if (!j.is_object())
    raise(ErrorCode::malformed_input, "model json is not an object");

  int version = require(j, "version").get<int>();
  if (version > kModelFormatVersion || version < 1)
    raise(ErrorCode::bad_version,
          "model format version " + std::to_string(version) +
              " is not supported (library supports up to " +
              std::to_string(kModelFormatVersion) + ")");

  std::string type = require(j, "type").get<std::string>();
  if (type == "spline") return spline_from_json(j);
  if (type == "classifier") return classifier_from_json(j);
  raise(ErrorCode::malformed_input, "unknown model type '" + type + "'");
}

AnyModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::io_error, "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_model_json(text);
}

}  // namespace levelsense
