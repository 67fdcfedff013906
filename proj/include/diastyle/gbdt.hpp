#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "diastyle/feature_matrix.hpp"

namespace diastyle::gbdt {

// Dense row-major design matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Internal nodes send x[feature] <= threshold to `left`. Leaves carry a
// logit increment in `value` (before the learning rate is applied).
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  double cover = 0.0;  // training rows reaching the node

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Flat node array, root at index 0.
struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  std::size_t depth() const;
  bool operator==(const Tree&) const = default;
};

struct TreeEnsemble {
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::vector<std::string> feature_names;
  std::vector<Tree> trees;

  // base_score + learning_rate * sum_t tree_t(x), trees summed in order.
  double margin(std::span<const double> x) const;
  bool operator==(const TreeEnsemble&) const = default;
};

// Defaults follow scikit-learn's GradientBoostingClassifier.
struct TrainConfig {
  std::size_t n_trees = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;
  std::size_t min_samples_leaf = 1;
  std::uint64_t seed = 0;  // no stochastic component yet; kept for reproducibility records
};

// A candidate replaces the incumbent split only if its gain exceeds the
// incumbent by this relative margin; scan order (feature, then threshold
// ascending) decides near-ties.
inline constexpr double kRelativeGainTie = 1e-10;
// Nodes whose best gain does not exceed this stay leaves.
inline constexpr double kMinSplitGain = 1e-12;
inline constexpr double kHessianFloor = 1e-12;

double logistic(double margin);
// Mean binomial deviance / 2, i.e. mean log-loss at the given margins.
double log_loss(std::span<const double> margins, std::span<const int> labels);
// Midpoint of two consecutive distinct sorted values, clamped so lo <= t < hi.
double midpoint(double lo, double hi);

struct TrainTrace {
  std::vector<double> log_loss;  // index 0 = base score only, then one per round
};

// Stagewise fit of regression trees to the logistic negative gradient with
// one Newton step per leaf. Rows are put into a canonical order first, so
// the result does not depend on input row order. Throws
// std::invalid_argument for bad configs and DataError for single-class
// labels or non-finite features.
TreeEnsemble train(const Matrix& x, std::span<const int> y, std::vector<std::string> feature_names,
                   const TrainConfig& config, TrainTrace* trace = nullptr);

std::vector<double> predict_margin(const TreeEnsemble& model, const Matrix& x);
std::vector<double> predict_proba(const TreeEnsemble& model, const Matrix& x);
// Checks the column names against the model's feature names.
std::vector<double> predict_proba(const TreeEnsemble& model, const FeatureMatrix& x);

// Fraction of rows where (proba >= threshold) matches the label.
double accuracy(const TreeEnsemble& model, const Matrix& x, std::span<const int> y, double threshold = 0.5);

std::string to_json(const TreeEnsemble& model);
TreeEnsemble ensemble_from_json(std::string_view json_text);

}  // namespace diastyle::gbdt
