#include "levelsense/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "levelsense/errors.hpp"

namespace levelsense {

namespace {

// Dual coordinate descent for the hinge-loss linear separator
//   min_w 1/2 ||w||^2 + C * sum_i max(0, 1 - y_i w.x_i)
// on bias-augmented rows. Samples are visited in a fixed order with no
// shrinking, so the solution is reproducible run to run.
Eigen::VectorXd solve_pairwise(const Eigen::MatrixXd& aug,
                               const Eigen::VectorXd& y, double c,
                               int max_passes, double tol) {
  const Eigen::Index n = aug.rows();
  const Eigen::Index d = aug.cols();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd qii(n);
  for (Eigen::Index i = 0; i < n; ++i) qii[i] = aug.row(i).squaredNorm();

  for (int pass = 0; pass < max_passes; ++pass) {
    double max_step = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (qii[i] <= 0.0) continue;
      double grad = y[i] * aug.row(i).dot(w) - 1.0;
      double next = std::clamp(alpha[i] - grad / qii[i], 0.0, c);
      double step = next - alpha[i];
      if (step != 0.0) {
        w += step * y[i] * aug.row(i).transpose();
        alpha[i] = next;
        max_step = std::max(max_step, std::abs(step) * std::sqrt(qii[i]));
      }
    }
    if (max_step < tol) break;
  }
  return w;
}

struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x) {
    Standardizer s;
    s.mean = x.colwise().mean();
    Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
    s.scale =
        (centered.colwise().squaredNorm() / std::max<double>(1.0, x.rows() - 1))
            .cwiseSqrt();
    for (Eigen::Index i = 0; i < s.scale.size(); ++i)
      if (s.scale[i] <= 0.0) s.scale[i] = 1.0;
    return s;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - mean.transpose()).array().rowwise() /
           scale.transpose().array();
  }
};

ClassifierModel train_at_c(const Eigen::MatrixXd& features,
                           const std::vector<int>& labels,
                           const std::vector<int>& classes, double c,
                           const TrainOptions& opts) {
  ClassifierModel model;
  model.classes = classes;
  model.chosen_c = c;
  Standardizer std_fit = Standardizer::fit(features);
  model.feature_mean = std_fit.mean;
  model.feature_scale = std_fit.scale;
  Eigen::MatrixXd x = std_fit.apply(features);

  for (std::size_t a = 0; a < classes.size(); ++a) {
    for (std::size_t b = a + 1; b < classes.size(); ++b) {
      std::vector<Eigen::Index> rows;
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == classes[a] || labels[i] == classes[b])
          rows.push_back(static_cast<Eigen::Index>(i));
      Eigen::MatrixXd aug(rows.size(), x.cols() + 1);
      Eigen::VectorXd y(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        aug.row(static_cast<Eigen::Index>(r)).head(x.cols()) = x.row(rows[r]);
        aug(static_cast<Eigen::Index>(r), x.cols()) = 1.0;
        y[static_cast<Eigen::Index>(r)] =
            labels[static_cast<std::size_t>(rows[r])] == classes[a] ? 1.0
                                                                    : -1.0;
      }
      Eigen::VectorXd w =
          solve_pairwise(aug, y, c, opts.solver_max_passes, opts.solver_tol);
      PairwiseFunction fn;
      fn.class_a = classes[a];
      fn.class_b = classes[b];
      fn.weights = w.head(x.cols());
      fn.bias = w[x.cols()];
      model.pairs.push_back(std::move(fn));
    }
  }
  return model;
}

}  // namespace

ClassifierModel train_classifier(const Eigen::MatrixXd& features,
                                 const std::vector<int>& labels,
                                 const TrainOptions& opts) {
  if (features.rows() != static_cast<Eigen::Index>(labels.size()))
    raise(ErrorCode::dimension_mismatch,
          "feature rows and labels differ in length");
  if (features.rows() == 0)
    raise(ErrorCode::insufficient_data, "no training samples");
  if (opts.c_grid.empty())
    raise(ErrorCode::config_error, "C grid is empty");

  std::map<int, int> counts;
  for (int l : labels) ++counts[l];
  if (counts.size() < 2)
    raise(ErrorCode::degenerate_input,
          "training needs at least two classes, got " +
              std::to_string(counts.size()));
  int min_count = features.rows() > 0 ? static_cast<int>(labels.size()) : 0;
  std::vector<int> classes;
  for (const auto& [label, count] : counts) {
    classes.push_back(label);
    min_count = std::min(min_count, count);
  }
  if (min_count < 2)
    raise(ErrorCode::insufficient_data,
          "every class needs at least two samples");

  // Stratified fold assignment: the j-th sample of a class (in input order)
  // lands in fold j mod k. Deterministic, no RNG involved.
  const int k = std::min(opts.max_cv_folds, min_count);
  std::vector<int> fold(labels.size());
  std::map<int, int> seen;
  for (std::size_t i = 0; i < labels.size(); ++i)
    fold[i] = seen[labels[i]]++ % k;

  double best_acc = -1.0;
  double best_c = opts.c_grid.front();
  for (double c : opts.c_grid) {
    int correct = 0, total = 0;
    for (int f = 0; f < k; ++f) {
      std::vector<Eigen::Index> train_rows, test_rows;
      for (std::size_t i = 0; i < labels.size(); ++i)
        (fold[i] == f ? test_rows : train_rows)
            .push_back(static_cast<Eigen::Index>(i));
      if (train_rows.empty() || test_rows.empty()) continue;
      Eigen::MatrixXd train_x(train_rows.size(), features.cols());
      std::vector<int> train_y(train_rows.size());
      for (std::size_t r = 0; r < train_rows.size(); ++r) {
        train_x.row(static_cast<Eigen::Index>(r)) = features.row(train_rows[r]);
        train_y[r] = labels[static_cast<std::size_t>(train_rows[r])];
      }
      ClassifierModel fold_model =
          train_at_c(train_x, train_y, classes, c, opts);
      for (Eigen::Index i : test_rows) {
        int predicted = predict_discrete(
            fold_model, Eigen::VectorXd(features.row(i).transpose()));
        correct += predicted == labels[static_cast<std::size_t>(i)] ? 1 : 0;
        ++total;
      }
    }
    double acc = total > 0 ? static_cast<double>(correct) / total : 0.0;
    if (acc > best_acc) {  // ties keep the earlier, smaller C
      best_acc = acc;
      best_c = c;
    }
  }

  return train_at_c(features, labels, classes, best_c, opts);
}

int predict_discrete(const ClassifierModel& model,
                     const Eigen::VectorXd& features) {
  if (features.size() != model.feature_mean.size())
    raise(ErrorCode::dimension_mismatch,
          "feature vector length does not match the model");
  if (model.pairs.empty())
    raise(ErrorCode::malformed_input, "classifier has no pairwise functions");

  Eigen::VectorXd x = (features - model.feature_mean).array() /
                      model.feature_scale.array();
  std::map<int, int> votes;
  for (int cls : model.classes) votes[cls] = 0;
  for (const PairwiseFunction& fn : model.pairs) {
    double decision = fn.weights.dot(x) + fn.bias;
    ++votes[decision >= 0.0 ? fn.class_a : fn.class_b];
  }
  int best_class = model.classes.front();
  int best_votes = -1;
  for (int cls : model.classes) {  // ascending, ties keep the lower label
    if (votes[cls] > best_votes) {
      best_votes = votes[cls];
      best_class = cls;
    }
  }
  return best_class;
}

std::vector<int> predict_discrete(const ClassifierModel& model,
                                  const Eigen::MatrixXd& features) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    out.push_back(
        predict_discrete(model, Eigen::VectorXd(features.row(i).transpose())));
  return out;
}

}  // namespace levelsense
