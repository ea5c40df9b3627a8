#include "levelsense/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "levelsense/errors.hpp"

namespace levelsense {

ContinuousReport evaluate_continuous(const std::vector<double>& predicted_ml,
                                     const std::vector<double>& truth_ml,
                                     double capacity_ml) {
  if (predicted_ml.size() != truth_ml.size())
    raise(ErrorCode::dimension_mismatch,
          "predicted and truth lengths differ");
  if (predicted_ml.empty())
    raise(ErrorCode::insufficient_data, "nothing to evaluate");
  if (!(capacity_ml > 0.0))
    raise(ErrorCode::config_error, "capacity must be positive");

  ContinuousReport report;
  report.capacity_ml = capacity_ml;
  report.error_rates.reserve(predicted_ml.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted_ml.size(); ++i) {
    double rate = std::abs(predicted_ml[i] - truth_ml[i]) / capacity_ml;
    report.error_rates.push_back(rate);
    sum += rate;
  }
  report.mean_error_rate = sum / static_cast<double>(predicted_ml.size());
  report.mean_accuracy = 1.0 - report.mean_error_rate;
  return report;
}

DiscreteReport evaluate_discrete(const std::vector<int>& predicted,
                                 const std::vector<int>& truth) {
  if (predicted.size() != truth.size())
    raise(ErrorCode::dimension_mismatch, "predicted and truth lengths differ");
  if (predicted.empty())
    raise(ErrorCode::insufficient_data, "nothing to evaluate");

  std::set<int> label_set(truth.begin(), truth.end());
  label_set.insert(predicted.begin(), predicted.end());

  DiscreteReport report;
  report.classes.assign(label_set.begin(), label_set.end());
  std::map<int, int> index;
  for (std::size_t i = 0; i < report.classes.size(); ++i)
    index[report.classes[i]] = static_cast<int>(i);

  const int k = static_cast<int>(report.classes.size());
  report.confusion = Eigen::MatrixXi::Zero(k, k);
  int correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    report.confusion(index[truth[i]], index[predicted[i]]) += 1;
    correct += predicted[i] == truth[i] ? 1 : 0;
  }
  report.accuracy = static_cast<double>(correct) / truth.size();

  report.precision.resize(k, 0.0);
  report.recall.resize(k, 0.0);
  report.f_score.resize(k, 0.0);
  double total = static_cast<double>(truth.size());
  for (int i = 0; i < k; ++i) {
    double tp = report.confusion(i, i);
    double predicted_as = report.confusion.col(i).sum();
    double support = report.confusion.row(i).sum();
    report.precision[i] = predicted_as > 0 ? tp / predicted_as : 0.0;
    report.recall[i] = support > 0 ? tp / support : 0.0;
    double denom = report.precision[i] + report.recall[i];
    report.f_score[i] =
        denom > 0 ? 2.0 * report.precision[i] * report.recall[i] / denom : 0.0;
    double weight = support / total;
    report.weighted_precision += weight * report.precision[i];
    report.weighted_recall += weight * report.recall[i];
    report.weighted_f_score += weight * report.f_score[i];
  }
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j = nlohmann::json::object();
  if (report.continuous) {
    const ContinuousReport& c = *report.continuous;
    j["continuous"] = {{"capacity_ml", c.capacity_ml},
                       {"error_rates", c.error_rates},
                       {"mean_error_rate", c.mean_error_rate},
                       {"mean_accuracy", c.mean_accuracy}};
  }
  if (report.discrete) {
    const DiscreteReport& d = *report.discrete;
    std::vector<std::vector<int>> confusion;
    for (Eigen::Index r = 0; r < d.confusion.rows(); ++r) {
      std::vector<int> row;
      for (Eigen::Index col = 0; col < d.confusion.cols(); ++col)
        row.push_back(d.confusion(r, col));
      confusion.push_back(std::move(row));
    }
    j["discrete"] = {{"classes", d.classes},
                     {"confusion", confusion},
                     {"precision", d.precision},
                     {"recall", d.recall},
                     {"f_score", d.f_score},
                     {"weighted_precision", d.weighted_precision},
                     {"weighted_recall", d.weighted_recall},
                     {"weighted_f_score", d.weighted_f_score},
                     {"accuracy", d.accuracy}};
  }
  return j.dump(2) + "\n";
}

void print_report(const EvalReport& report, std::ostream& out) {
  if (report.continuous) {
    const ContinuousReport& c = *report.continuous;
    out << "continuous (" << c.error_rates.size() << " samples, capacity "
        << c.capacity_ml << " ml)\n";
    out << "  mean error rate  " << std::fixed << std::setprecision(4)
        << c.mean_error_rate << "\n";
    out << "  mean accuracy    " << c.mean_accuracy << "\n";
    out.unsetf(std::ios::floatfield);
  }
  if (report.discrete) {
    const DiscreteReport& d = *report.discrete;
    out << "discrete (" << d.confusion.sum() << " samples, "
        << d.classes.size() << " classes)\n";
    out << "  accuracy " << std::fixed << std::setprecision(4) << d.accuracy
        << "\n";
    out << "  class  precision  recall  f-score\n";
    for (std::size_t i = 0; i < d.classes.size(); ++i) {
      out << "  " << std::setw(5) << d.classes[i] << "  " << std::setw(9)
          << d.precision[i] << "  " << std::setw(6) << d.recall[i] << "  "
          << std::setw(7) << d.f_score[i] << "\n";
    }
    out << "  " << std::setw(5) << "avg" << "  " << std::setw(9)
        << d.weighted_precision << "  " << std::setw(6) << d.weighted_recall
        << "  " << std::setw(7) << d.weighted_f_score << "\n";
    out << "  confusion (rows true, cols predicted)\n";
    for (Eigen::Index r = 0; r < d.confusion.rows(); ++r) {
      out << "   ";
      for (Eigen::Index col = 0; col < d.confusion.cols(); ++col)
        out << " " << std::setw(4) << d.confusion(r, col);
      out << "\n";
    }
    out.unsetf(std::ios::floatfield);
  }
  if (!report.continuous && !report.discrete) out << "empty report\n";
}

}  // namespace levelsense
