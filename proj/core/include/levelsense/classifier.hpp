#pragma once

#include <Eigen/Dense>
#include <vector>

namespace levelsense {

// One-vs-one linear soft-margin classifier over standardized features.
// A pairwise function separates classes (i, j), i < j: positive decision
// votes for class i. Prediction is the majority vote, ties resolving to the
// lower label.
struct PairwiseFunction {
  int class_a = 0;  // lower label, positive side
  int class_b = 0;
  Eigen::VectorXd weights;
  double bias = 0.0;
};

struct ClassifierModel {
  std::vector<int> classes;              // sorted ascending
  std::vector<PairwiseFunction> pairs;   // K*(K-1)/2, (a,b) lexicographic
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;         // zero-variance features scale 1
  double chosen_c = 1.0;
};

struct TrainOptions {
  std::vector<double> c_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
  int max_cv_folds = 5;     // actual k = min(this, smallest class size)
  int solver_max_passes = 2000;
  double solver_tol = 1e-12;
};

// Hinge-loss (1/C-regularized) linear separators for every class pair,
// trained by deterministic dual coordinate descent on standardized features
// with an augmented bias. C comes from stratified k-fold cross-validation
// accuracy over c_grid, ties to the smaller C. Fewer than two classes
// (ErrorCode::degenerate_input) or a class with fewer than two samples
// (ErrorCode::insufficient_data) are rejected.
ClassifierModel train_classifier(const Eigen::MatrixXd& features,
                                 const std::vector<int>& labels,
                                 const TrainOptions& opts = {});

int predict_discrete(const ClassifierModel& model,
                     const Eigen::VectorXd& features);
std::vector<int> predict_discrete(const ClassifierModel& model,
                                  const Eigen::MatrixXd& features);

}  // namespace levelsense
