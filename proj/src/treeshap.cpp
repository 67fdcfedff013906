#include "diastyle/treeshap.hpp"

#include <cmath>
#include <stdexcept>

#include "diastyle/csv.hpp"
#include "diastyle/parallel.hpp"

namespace diastyle::shap {

double ShapRow::total() const {
  double s = base;
  for (double v : phi) s += v;
  return s;
}

namespace {

double node_expectation(const gbdt::Tree& tree, int i) {
  const auto& n = tree.nodes[static_cast<std::size_t>(i)];
  if (n.is_leaf()) return n.value;
  const auto& l = tree.nodes[static_cast<std::size_t>(n.left)];
  const auto& r = tree.nodes[static_cast<std::size_t>(n.right)];
  return (l.cover * node_expectation(tree, n.left) + r.cover * node_expectation(tree, n.right)) / n.cover;
}

// One element of the decision path: which feature, what fraction of
// "feature absent" (zero) and "feature present" (one) paths flow through,
// and the permutation weight of subsets of each size.
struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double weight = 0.0;
};

void extend_path(PathElement* path, std::size_t depth, double zero_fraction, double one_fraction, int feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  const double denom = static_cast<double>(depth + 1);
  for (std::size_t k = depth; k-- > 0;) {
    path[k + 1].weight += one_fraction * path[k].weight * static_cast<double>(k + 1) / denom;
    path[k].weight = zero_fraction * path[k].weight * static_cast<double>(depth - k) / denom;
  }
}

void unwind_path(PathElement* path, std::size_t depth, std::size_t index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  const double denom = static_cast<double>(depth + 1);
  double next = path[depth].weight;
  for (std::size_t k = depth; k-- > 0;) {
    if (one != 0.0) {
      const double tmp = path[k].weight;
      path[k].weight = next * denom / (static_cast<double>(k + 1) * one);
      next = tmp - path[k].weight * zero * static_cast<double>(depth - k) / denom;
    } else {
      path[k].weight = path[k].weight * denom / (zero * static_cast<double>(depth - k));
    }
  }
  for (std::size_t k = index; k < depth; ++k) {
    path[k].feature = path[k + 1].feature;
    path[k].zero_fraction = path[k + 1].zero_fraction;
    path[k].one_fraction = path[k + 1].one_fraction;
  }
}

// Total permutation weight if element `index` were unwound.
double unwound_sum(const PathElement* path, std::size_t depth, std::size_t index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  const double denom = static_cast<double>(depth + 1);
  double next = path[depth].weight;
  double total = 0.0;
  for (std::size_t k = depth; k-- > 0;) {
    if (one != 0.0) {
      const double tmp = next * denom / (static_cast<double>(k + 1) * one);
      total += tmp;
      next = path[k].weight - tmp * zero * static_cast<double>(depth - k) / denom;
    } else {
      total += path[k].weight / (zero * static_cast<double>(depth - k) / denom);
    }
  }
  return total;
}

void recurse(const gbdt::Tree& tree, std::span<const double> x, std::span<double> phi, int node_index,
             std::size_t depth, PathElement* parent_path, double zero_fraction, double one_fraction,
             int feature) {
  const auto& node = tree.nodes[static_cast<std::size_t>(node_index)];

  PathElement* path = parent_path + depth + 1;
  std::copy(parent_path, parent_path + depth + 1, path);
  extend_path(path, depth, zero_fraction, one_fraction, feature);

  if (node.is_leaf()) {
    for (std::size_t i = 1; i <= depth; ++i) {
      const double w = unwound_sum(path, depth, i);
      const auto& el = path[i];
      phi[static_cast<std::size_t>(el.feature)] += w * (el.one_fraction - el.zero_fraction) * node.value;
    }
    return;
  }

  const bool go_left = x[static_cast<std::size_t>(node.feature)] <= node.threshold;
  const int hot = go_left ? node.left : node.right;
  const int cold = go_left ? node.right : node.left;
  const double hot_zero = tree.nodes[static_cast<std::size_t>(hot)].cover / node.cover;
  const double cold_zero = tree.nodes[static_cast<std::size_t>(cold)].cover / node.cover;
  double incoming_zero = 1.0;
  double incoming_one = 1.0;

  // A feature already on the path is unwound and re-extended with the
  // combined fractions.
  std::size_t k = 1;
  for (; k <= depth; ++k) {
    if (path[k].feature == node.feature) break;
  }
  if (k <= depth) {
    incoming_zero = path[k].zero_fraction;
    incoming_one = path[k].one_fraction;
    unwind_path(path, depth, k);
    --depth;
  }

  recurse(tree, x, phi, hot, depth + 1, path, hot_zero * incoming_zero, incoming_one, node.feature);
  recurse(tree, x, phi, cold, depth + 1, path, cold_zero * incoming_zero, 0.0, node.feature);
}

}  // namespace

double expected_value(const gbdt::Tree& tree) { return node_expectation(tree, 0); }

void tree_shap(const gbdt::Tree& tree, std::span<const double> x, std::span<double> phi) {
  const std::size_t max_depth = tree.depth() + 2;
  std::vector<PathElement> storage((max_depth * (max_depth + 1)) / 2 + 1);
  recurse(tree, x, phi, 0, 0, storage.data(), 1.0, 1.0, -1);
}

ShapRow shap_values(const gbdt::TreeEnsemble& model, std::span<const double> x) {
  if (x.size() != model.feature_names.size()) {
    throw std::invalid_argument("schema mismatch: row has " + std::to_string(x.size()) + " values, model expects " +
                                std::to_string(model.feature_names.size()));
  }
  ShapRow row;
  row.phi.assign(x.size(), 0.0);
  row.base = model.base_score;
  std::vector<double> tree_phi(x.size());
  for (const auto& tree : model.trees) {
    std::fill(tree_phi.begin(), tree_phi.end(), 0.0);
    tree_shap(tree, x, tree_phi);
    for (std::size_t f = 0; f < x.size(); ++f) row.phi[f] += model.learning_rate * tree_phi[f];
    row.base += model.learning_rate * expected_value(tree);
  }
  return row;
}

std::vector<ShapRow> shap_values(const gbdt::TreeEnsemble& model, const gbdt::Matrix& x, std::size_t threads) {
  if (x.cols != model.feature_names.size()) throw std::invalid_argument("schema mismatch: column count differs from the model's");
  std::vector<ShapRow> rows(x.rows);
  parallel_for(x.rows, threads, [&](std::size_t r) { rows[r] = shap_values(model, x.row(r)); });
  return rows;
}

ImportanceSummary mean_abs_shap(const std::vector<ShapRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("mean_abs_shap needs at least one row");
  const std::size_t d = rows.front().phi.size();
  ImportanceSummary s;
  s.samples = rows.size();
  s.mean_abs.assign(d, 0.0);
  s.std_abs.assign(d, 0.0);
  for (const auto& r : rows) {
    if (r.phi.size() != d) throw std::invalid_argument("ShapRow width mismatch");
    for (std::size_t f = 0; f < d; ++f) s.mean_abs[f] += std::abs(r.phi[f]);
  }
  const double n = static_cast<double>(rows.size());
  for (auto& m : s.mean_abs) m /= n;
  if (rows.size() > 1) {
    for (const auto& r : rows) {
      for (std::size_t f = 0; f < d; ++f) {
        const double dev = std::abs(r.phi[f]) - s.mean_abs[f];
        s.std_abs[f] += dev * dev;
      }
    }
    for (auto& v : s.std_abs) v = std::sqrt(v / (n - 1.0));
  }
  return s;
}

std::string to_csv(const std::vector<std::string>& ids, const std::vector<std::string>& features,
                   const std::vector<ShapRow>& rows) {
  std::vector<std::string> header{"id"};
  header.insert(header.end(), features.begin(), features.end());
  header.emplace_back("base");
  header.emplace_back("margin");
  std::string out = csv::join(header) + "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += csv::escape(ids[r]);
    for (double v : rows[r].phi) out += "," + io::format_sig(v, 6);
    out += "," + io::format_sig(rows[r].base, 6) + "," + io::format_sig(rows[r].total(), 6) + "\n";
  }
  return out;
}

}  // namespace diastyle::shap
