#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "diastyle/gbdt.hpp"

namespace diastyle::shap {

// Attributions in logit units; base + sum(phi) equals the model margin.
struct ShapRow {
  std::vector<double> phi;
  double base = 0.0;

  double total() const;
};

// Cover-weighted mean leaf value of a tree (the path-dependent expectation
// with no features fixed).
double expected_value(const gbdt::Tree& tree);

// Exact path-dependent Tree SHAP for one tree, accumulated into `phi`.
void tree_shap(const gbdt::Tree& tree, std::span<const double> x, std::span<double> phi);

// Trees are visited in index order; per-tree attributions are scaled by the
// learning rate. Throws std::invalid_argument on column count mismatch.
ShapRow shap_values(const gbdt::TreeEnsemble& model, std::span<const double> x);
std::vector<ShapRow> shap_values(const gbdt::TreeEnsemble& model, const gbdt::Matrix& x,
                                 std::size_t threads = 1);

struct ImportanceSummary {
  std::vector<double> mean_abs;  // per feature
  std::vector<double> std_abs;   // sample std of |phi| (0 for a single row)
  std::size_t samples = 0;
};

// Throws std::invalid_argument on empty input.
ImportanceSummary mean_abs_shap(const std::vector<ShapRow>& rows);

// CSV: id,<features...>,base,margin
std::string to_csv(const std::vector<std::string>& ids, const std::vector<std::string>& features,
                   const std::vector<ShapRow>& rows);

}  // namespace diastyle::shap
