#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "diastyle/corpus.hpp"
#include "diastyle/feature_matrix.hpp"
#include "diastyle/gbdt.hpp"
#include "diastyle/lexfeat.hpp"
#include "diastyle/stats.hpp"

namespace diastyle::experiment {

// S = 1 - 2 |acc - 0.5|. Throws std::invalid_argument outside [0, 1].
double similarity(double accuracy);

struct PairOptions {
  std::size_t runs = 3;
  double train_fraction = 0.8;
  bool balance = true;  // downsample the larger cohort to the smaller one
  std::uint64_t seed = 0;
  std::size_t min_cohort_size = 10;
  gbdt::TrainConfig train;
  std::size_t threads = 0;  // pair-level parallelism in the multi-pair drivers
};

// Seed for one run of one pair. Order-independent in the two labels, so
// (A, B) and (B, A) see the same subsample and split:
//   h = fnv1a(min(a,b)) ; h = fnv1a("\x1f" + max(a,b), h)
//   seed = mix64(mix64(master ^ h) + run)
std::uint64_t run_seed(std::uint64_t master, std::string_view label_a, std::string_view label_b,
                       std::size_t run);

// Design matrices for one run of a pair. Rows of `a` are labelled 0, rows
// of `b` labelled 1.
struct RunData {
  gbdt::Matrix train_x;
  std::vector<int> train_y;
  gbdt::Matrix test_x;
  std::vector<int> test_y;
  std::vector<std::string> test_ids;
};

RunData prepare_run(const Cohort& a, const Cohort& b, const FeatureMatrix& features,
                    const PairOptions& options, std::size_t run);

struct PairResult {
  std::string label_a;
  std::string label_b;
  FeatureKind kind = FeatureKind::handcrafted;
  std::vector<double> run_accuracy;
  std::vector<double> run_similarity;
  double mean_acc = 0.0;
  double acc_std = 0.0;  // sample std over runs
  double similarity = 0.0;  // from mean_acc
  std::size_t rows_a = 0;   // after balancing
  std::size_t rows_b = 0;
};

// Throws DataError on an undersized cohort or a message without a feature row.
PairResult run_pair(const Cohort& a, const Cohort& b, const FeatureMatrix& features, const PairOptions& options);

// Year cohorts (numeric labels) in ascending order; throws DataError if any
// label is non-numeric.
std::vector<const Cohort*> numeric_cohorts(std::span<const Cohort> cohorts);

struct GapPoint {
  long gap = 0;
  std::size_t pairs = 0;
  double mean_similarity = 0.0;
  double std_similarity = 0.0;  // sample std over pairs (0 for a single pair)
};

struct GapCurve {
  FeatureKind kind = FeatureKind::handcrafted;
  std::vector<PairResult> pairs;  // (earlier, later) year order
  std::vector<GapPoint> points;   // ascending gap
};

// All unordered year pairs, grouped by |year_a - year_b|. Needs >= 3 cohorts.
GapCurve gap_curve(std::span<const Cohort> years, const FeatureMatrix& features, const PairOptions& options);

struct AlignmentProfile {
  std::string label;
  FeatureKind kind = FeatureKind::handcrafted;
  std::vector<PairResult> pairs;  // one per year, ascending
  std::vector<std::pair<std::string, double>> per_year;  // year -> S
  double mean = 0.0;
  double std = 0.0;  // sample std (n - 1)
  std::optional<stats::VarianceTest> variance_test;
};

AlignmentProfile align_cohort(const Cohort& generated, std::span<const Cohort> years, const FeatureMatrix& features,
                              const PairOptions& options, std::optional<double> sigma0 = std::nullopt);

enum class ShapUnit { pair, gap };
ShapUnit parse_shap_unit(std::string_view text);
std::string_view to_string(ShapUnit unit);

struct ShapFeatureStat {
  std::string feature;
  double mean = 0.0;
  double std = 0.0;
  std::optional<double> t;  // absent when the sample has zero variance
  std::optional<double> p;
  bool significant = false;  // p < 0.05
};

struct PairImportance {
  std::string label_a;
  std::string label_b;
  long gap = 0;
  std::vector<double> mean_abs;  // averaged over runs, per feature
};

struct ShapTrendReport {
  ShapUnit unit = ShapUnit::pair;
  std::vector<std::string> features;
  std::vector<PairImportance> pairs;
  std::vector<std::pair<long, std::vector<double>>> by_gap;  // gap -> mean importance per feature
  std::vector<ShapFeatureStat> stats;  // one per feature, column order
};

// Mean |SHAP| on each run's held-out split, averaged per pair, then tested
// against zero over pairs (unit = pair) or over per-gap means (unit = gap).
ShapTrendReport shap_trends(std::span<const Cohort> years, const FeatureMatrix& features,
                            const PairOptions& options, ShapUnit unit = ShapUnit::pair);

struct TrendRow {
  std::string feature;
  double slope = 0.0;
  std::optional<double> rho;  // absent for a constant feature
  std::optional<double> p;
  bool significant = false;
};

struct TrendReport {
  std::vector<std::string> years;
  std::vector<TrendRow> rows;
};

// Slope and Spearman trend against the numeric year for each requested
// feature (all profile features when `features` is empty).
TrendReport liwc_trends(const std::vector<YearlyLexProfile>& profiles, const std::vector<std::string>& features = {});

}  // namespace diastyle::experiment
