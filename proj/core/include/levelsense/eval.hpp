#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace levelsense {

// Continuous scoring: per-sample error rate = |predicted - truth| / capacity,
// accuracy = 1 - mean error rate.
struct ContinuousReport {
  std::vector<double> error_rates;
  double mean_error_rate = 0.0;
  double mean_accuracy = 0.0;
  double capacity_ml = 0.0;
};

// Discrete scoring: confusion(i, j) counts samples of true class i predicted
// as class j. Precision/recall/F per class, plus support-weighted averages.
struct DiscreteReport {
  std::vector<int> classes;
  Eigen::MatrixXi confusion;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f_score;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f_score = 0.0;
  double accuracy = 0.0;
};

struct EvalReport {
  std::optional<ContinuousReport> continuous;
  std::optional<DiscreteReport> discrete;
};

// Length mismatch or empty input throws ErrorCode::dimension_mismatch /
// insufficient_data; capacity must be positive.
ContinuousReport evaluate_continuous(const std::vector<double>& predicted_ml,
                                     const std::vector<double>& truth_ml,
                                     double capacity_ml);

// Classes are the union of labels seen in either vector.
DiscreteReport evaluate_discrete(const std::vector<int>& predicted,
                                 const std::vector<int>& truth);

std::string report_to_json(const EvalReport& report);
void print_report(const EvalReport& report, std::ostream& out);

}  // namespace levelsense
