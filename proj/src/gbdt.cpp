#include "diastyle/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "diastyle/error.hpp"

namespace diastyle::gbdt {

double Tree::predict(std::span<const double> x) const {
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

double TreeEnsemble::margin(std::span<const double> x) const {
  double m = base_score;
  for (const auto& t : trees) m += learning_rate * t.predict(x);
  return m;
}

double logistic(double margin) {
  if (margin >= 0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

double log_loss(std::span<const double> margins, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    const double f = margins[i];
    // log(1 + e^f) - y f
    const double softplus = f > 0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f));
    total += softplus - labels[i] * f;
  }
  return total / static_cast<double>(margins.size());
}

double midpoint(double lo, double hi) {
  double t = (lo + hi) / 2.0;
  if (!(t < hi)) t = lo;
  return t;
}

namespace {

struct Builder {
  // Column-major copy of the canonically ordered training rows.
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<std::vector<double>> columns;
  std::vector<double> residual;
  std::vector<double> hessian;
  std::vector<double>* margins = nullptr;
  const TrainConfig* config = nullptr;
  std::vector<char> goes_left;

  // rows_by_feature[f] lists the node's rows sorted by (x_f, row);
  // members lists the node's rows ascending.
  int build(Tree& tree, const std::vector<std::vector<std::uint32_t>>& rows_by_feature,
            const std::vector<std::uint32_t>& members, std::size_t depth) {
    const std::size_t count = members.size();
    double sum_r = 0.0;
    for (auto r : members) sum_r += residual[r];

    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    tree.nodes.back().cover = static_cast<double>(count);

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_gain = kMinSplitGain;
    const std::size_t min_leaf = config->min_samples_leaf;
    if (depth < config->max_depth && count >= 2 * min_leaf && count >= 2) {
      const double parent = sum_r * sum_r / static_cast<double>(count);
      for (std::size_t f = 0; f < d; ++f) {
        const auto& order = rows_by_feature[f];
        const auto& col = columns[f];
        double left_sum = 0.0;
        for (std::size_t i = 0; i + 1 < count; ++i) {
          left_sum += residual[order[i]];
          const double lo = col[order[i]];
          const double hi = col[order[i + 1]];
          if (lo == hi) continue;
          const std::size_t n_left = i + 1;
          const std::size_t n_right = count - n_left;
          if (n_left < min_leaf || n_right < min_leaf) continue;
          const double right_sum = sum_r - left_sum;
          const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                              right_sum * right_sum / static_cast<double>(n_right) - parent;
          if (gain > best_gain + kRelativeGainTie * std::abs(best_gain)) {
            best_gain = gain;
            best_feature = static_cast<int>(f);
            best_threshold = midpoint(lo, hi);
          }
        }
      }
    }

    if (best_feature < 0) {
      double sum_h = 0.0;
      for (auto r : members) sum_h += hessian[r];
      const double value = sum_r / std::max(sum_h, kHessianFloor);
      tree.nodes[static_cast<std::size_t>(index)].value = value;
      for (auto r : members) (*margins)[r] += config->learning_rate * value;
      return index;
    }

    const auto& col = columns[static_cast<std::size_t>(best_feature)];
    for (auto r : members) goes_left[r] = col[r] <= best_threshold ? 1 : 0;

    std::vector<std::vector<std::uint32_t>> left_rows(d), right_rows(d);
    for (std::size_t f = 0; f < d; ++f) {
      for (auto r : rows_by_feature[f]) (goes_left[r] ? left_rows[f] : right_rows[f]).push_back(r);
    }
    std::vector<std::uint32_t> left_members, right_members;
    for (auto r : members) (goes_left[r] ? left_members : right_members).push_back(r);

    const int left = build(tree, left_rows, left_members, depth + 1);
    const int right = build(tree, right_rows, right_members, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(index)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left;
    node.right = right;
    return index;
  }
};

void validate(const Matrix& x, std::span<const int> y, const std::vector<std::string>& names,
              const TrainConfig& config) {
  if (config.n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
  if (config.max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (config.min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
  if (!(config.learning_rate > 0.0 && config.learning_rate <= 1.0)) {
    throw std::invalid_argument("learning_rate must lie in (0, 1]");
  }
  if (x.rows != y.size()) throw std::invalid_argument("row count does not match label count");
  if (x.rows < 2) throw DataError("training needs at least two rows");
  if (names.size() != x.cols) throw std::invalid_argument("feature name count does not match columns");
  std::size_t positives = 0;
  for (int label : y) {
    if (label != 0 && label != 1) throw DataError("labels must be 0 or 1");
    positives += static_cast<std::size_t>(label);
  }
  if (positives == 0 || positives == y.size()) throw DataError("training labels contain a single class");
  for (double v : x.data) {
    if (!std::isfinite(v)) throw DataError("training features contain a non-finite value");
  }
}

}  // namespace

TreeEnsemble train(const Matrix& x, std::span<const int> y, std::vector<std::string> feature_names,
                   const TrainConfig& config, TrainTrace* trace) {
  validate(x, y, feature_names, config);
  const std::size_t n = x.rows;
  const std::size_t d = x.cols;

  // Canonical row order: lexicographic on (features..., label).
  std::vector<std::size_t> canon(n);
  std::iota(canon.begin(), canon.end(), 0);
  std::stable_sort(canon.begin(), canon.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = x.row(a);
    const auto rb = x.row(b);
    for (std::size_t f = 0; f < d; ++f) {
      if (ra[f] != rb[f]) return ra[f] < rb[f];
    }
    return y[a] < y[b];
  });

  Builder b;
  b.n = n;
  b.d = d;
  b.config = &config;
  b.columns.assign(d, std::vector<double>(n));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = y[canon[i]];
    const auto row = x.row(canon[i]);
    for (std::size_t f = 0; f < d; ++f) b.columns[f][i] = row[f];
  }

  std::vector<std::vector<std::uint32_t>> root_rows(d, std::vector<std::uint32_t>(n));
  for (std::size_t f = 0; f < d; ++f) {
    auto& order = root_rows[f];
    std::iota(order.begin(), order.end(), 0u);
    const auto& col = b.columns[f];
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t c) {
      return col[a] != col[c] ? col[a] < col[c] : a < c;
    });
  }
  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);

  const double positives = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double prior = positives / static_cast<double>(n);

  TreeEnsemble model;
  model.base_score = std::log(prior / (1.0 - prior));
  model.learning_rate = config.learning_rate;
  model.feature_names = std::move(feature_names);
  model.trees.reserve(config.n_trees);

  std::vector<double> margins(n, model.base_score);
  b.margins = &margins;
  b.residual.resize(n);
  b.hessian.resize(n);
  b.goes_left.assign(n, 0);
  if (trace) trace->log_loss = {log_loss(margins, labels)};

  for (std::size_t t = 0; t < config.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = logistic(margins[i]);
      b.residual[i] = labels[i] - p;
      b.hessian[i] = p * (1.0 - p);
    }
    Tree tree;
    b.build(tree, root_rows, all, 0);
    model.trees.push_back(std::move(tree));
    if (trace) trace->log_loss.push_back(log_loss(margins, labels));
  }
  return model;
}

std::vector<double> predict_margin(const TreeEnsemble& model, const Matrix& x) {
  if (x.cols != model.feature_names.size()) {
    throw std::invalid_argument("schema mismatch: matrix has " + std::to_string(x.cols) + " columns, model expects " +
                                std::to_string(model.feature_names.size()));
  }
  std::vector<double> out(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) out[r] = model.margin(x.row(r));
  return out;
}

std::vector<double> predict_proba(const TreeEnsemble& model, const Matrix& x) {
  auto out = predict_margin(model, x);
  for (auto& v : out) v = logistic(v);
  return out;
}

std::vector<double> predict_proba(const TreeEnsemble& model, const FeatureMatrix& x) {
  if (x.columns() != model.feature_names) throw std::invalid_argument("schema mismatch: column names differ from the model's");
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = logistic(model.margin(x.row(r)));
  return out;
}

double accuracy(const TreeEnsemble& model, const Matrix& x, std::span<const int> y, double threshold) {
  if (x.rows == 0) throw std::invalid_argument("accuracy needs a non-empty test set");
  if (x.rows != y.size()) throw std::invalid_argument("row count does not match label count");
  const auto proba = predict_proba(model, x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < proba.size(); ++i) {
    const int predicted = proba[i] >= threshold ? 1 : 0;
    if (predicted == y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(x.rows);
}

namespace {

using nlohmann::json;

json node_to_json(const Tree& tree, int i) {
  const auto& n = tree.nodes[static_cast<std::size_t>(i)];
  if (n.is_leaf()) return json{{"value", n.value}, {"cover", n.cover}};
  return json{{"feature", n.feature},
              {"threshold", n.threshold},
              {"cover", n.cover},
              {"left", node_to_json(tree, n.left)},
              {"right", node_to_json(tree, n.right)}};
}

int node_from_json(Tree& tree, const json& j, std::size_t n_features) {
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(TreeNode{});
  TreeNode node;
  node.cover = j.at("cover").get<double>();
  if (j.contains("feature")) {
    node.feature = j.at("feature").get<int>();
    if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= n_features) {
      throw DataError("model JSON: feature index out of range");
    }
    node.threshold = j.at("threshold").get<double>();
    node.left = node_from_json(tree, j.at("left"), n_features);
    node.right = node_from_json(tree, j.at("right"), n_features);
  } else {
    node.value = j.at("value").get<double>();
  }
  tree.nodes[static_cast<std::size_t>(index)] = node;
  return index;
}

}  // namespace

std::string to_json(const TreeEnsemble& model) {
  json doc;
  doc["base_score"] = model.base_score;
  doc["learning_rate"] = model.learning_rate;
  doc["feature_names"] = model.feature_names;
  doc["trees"] = json::array();
  for (const auto& t : model.trees) doc["trees"].push_back(node_to_json(t, 0));
  return doc.dump();
}

TreeEnsemble ensemble_from_json(std::string_view json_text) {
  try {
    const auto doc = json::parse(json_text);
    TreeEnsemble model;
    model.base_score = doc.at("base_score").get<double>();
    model.learning_rate = doc.at("learning_rate").get<double>();
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    for (const auto& t : doc.at("trees")) {
      Tree tree;
      node_from_json(tree, t, model.feature_names.size());
      model.trees.push_back(std::move(tree));
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace diastyle::gbdt
