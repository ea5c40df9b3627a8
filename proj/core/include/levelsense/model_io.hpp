#pragma once

#include <string>
#include <variant>

#include "levelsense/classifier.hpp"
#include "levelsense/spline.hpp"

namespace levelsense {

// Models persist as JSON tagged by {"type": "spline"|"classifier",
// "version": 1}. Serialization is canonical (sorted keys, shortest float
// round-trip), so save -> load -> save is byte-identical. Unknown type or a
// version ahead of this library throws ErrorCode::bad_version /
// malformed_input.
inline constexpr int kModelFormatVersion = 1;

using AnyModel = std::variant<SplineModel, ClassifierModel>;

std::string model_to_json(const SplineModel& model);
std::string model_to_json(const ClassifierModel& model);

void save_model(const SplineModel& model, const std::string& path);
void save_model(const ClassifierModel& model, const std::string& path);

AnyModel load_model(const std::string& path);
AnyModel parse_model_json(const std::string& text);

}  // namespace levelsense
