#include "diastyle/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "diastyle/error.hpp"
#include "diastyle/parallel.hpp"
#include "diastyle/rng.hpp"
#include "diastyle/treeshap.hpp"

namespace diastyle::experiment {

double similarity(double accuracy) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw std::invalid_argument("accuracy must lie in [0, 1]");
  return 1.0 - 2.0 * std::abs(accuracy - 0.5);
}

std::uint64_t run_seed(std::uint64_t master, std::string_view label_a, std::string_view label_b, std::size_t run) {
  const auto lo = std::min(label_a, label_b);
  const auto hi = std::max(label_a, label_b);
  std::uint64_t h = fnv1a(lo);
  h = fnv1a("\x1f", h);
  h = fnv1a(hi, h);
  return mix64(mix64(master ^ h) + static_cast<std::uint64_t>(run));
}

namespace {

void check_size(const Cohort& c, const PairOptions& options) {
  if (c.messages.size() < std::max<std::size_t>(options.min_cohort_size, 2)) {
    throw DataError("cohort '" + c.label + "' has " + std::to_string(c.messages.size()) +
                    " messages, below the minimum of " + std::to_string(std::max<std::size_t>(options.min_cohort_size, 2)));
  }
}

std::vector<std::size_t> subsample(std::size_t n, std::size_t m, SplitMix64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (m >= n) return idx;
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

void fill_row(gbdt::Matrix& x, std::size_t r, const FeatureMatrix& features, const Message& m) {
  const auto row = features.find(m.id);
  if (row == FeatureMatrix::npos) {
    throw DataError("no " + std::string(to_string(features.kind())) + " feature row for message id '" + m.id + "'");
  }
  const auto values = features.row(row);
  std::copy(values.begin(), values.end(), x.row(r).begin());
}

}  // namespace

RunData prepare_run(const Cohort& a, const Cohort& b, const FeatureMatrix& features, const PairOptions& options,
                    std::size_t run) {
  check_size(a, options);
  check_size(b, options);

  // Canonical cohort order keeps the pair symmetric in its arguments.
  const bool swapped = label_less(b.label, a.label);
  const Cohort& first = swapped ? b : a;
  const Cohort& second = swapped ? a : b;
  const int first_class = swapped ? 1 : 0;

  SplitMix64 rng(run_seed(options.seed, a.label, b.label, run));
  std::size_t n1 = first.messages.size();
  std::size_t n2 = second.messages.size();
  if (options.balance) n1 = n2 = std::min(n1, n2);
  const auto sel1 = subsample(first.messages.size(), n1, rng);
  const auto sel2 = subsample(second.messages.size(), n2, rng);
  const auto assignment = split_indices(sel1.size(), sel2.size(), options.train_fraction, rng.next());

  auto message_at = [&](std::size_t i) -> std::pair<const Message*, int> {
    if (i < sel1.size()) return {&first.messages[sel1[i]], first_class};
    return {&second.messages[sel2[i - sel1.size()]], 1 - first_class};
  };

  RunData data;
  const std::size_t d = features.cols();
  data.train_x = gbdt::Matrix(assignment.train.size(), d);
  data.test_x = gbdt::Matrix(assignment.test.size(), d);
  for (std::size_t r = 0; r < assignment.train.size(); ++r) {
    const auto [m, cls] = message_at(assignment.train[r]);
    fill_row(data.train_x, r, features, *m);
    data.train_y.push_back(cls);
  }
  for (std::size_t r = 0; r < assignment.test.size(); ++r) {
    const auto [m, cls] = message_at(assignment.test[r]);
    fill_row(data.test_x, r, features, *m);
    data.test_y.push_back(cls);
    data.test_ids.push_back(m->id);
  }
  return data;
}

PairResult run_pair(const Cohort& a, const Cohort& b, const FeatureMatrix& features, const PairOptions& options) {
  if (options.runs < 1) throw std::invalid_argument("runs must be >= 1");
  PairResult result;
  result.label_a = a.label;
  result.label_b = b.label;
  result.kind = features.kind();
  for (std::size_t run = 0; run < options.runs; ++run) {
    const auto data = prepare_run(a, b, features, options, run);
    const auto model = gbdt::train(data.train_x, data.train_y, features.columns(), options.train);
    const double acc = gbdt::accuracy(model, data.test_x, data.test_y);
    result.run_accuracy.push_back(acc);
    result.run_similarity.push_back(similarity(acc));
    if (run == 0) {
      for (int y : data.train_y) (y == 0 ? result.rows_a : result.rows_b) += 1;
      for (int y : data.test_y) (y == 0 ? result.rows_a : result.rows_b) += 1;
    }
  }
  result.mean_acc = stats::mean(result.run_accuracy);
  result.acc_std = stats::sample_std(result.run_accuracy);
  result.similarity = similarity(result.mean_acc);
  return result;
}

std::vector<const Cohort*> numeric_cohorts(std::span<const Cohort> cohorts) {
  std::vector<const Cohort*> out;
  for (const auto& c : cohorts) {
    if (!numeric_label(c.label)) throw DataError("cohort label '" + c.label + "' is not a numeric year");
    out.push_back(&c);
  }
  std::sort(out.begin(), out.end(), [](const Cohort* x, const Cohort* y) { return label_less(x->label, y->label); });
  return out;
}

namespace {

long year_gap(const Cohort& a, const Cohort& b) {
  return std::abs(*numeric_label(a.label) - *numeric_label(b.label));
}

std::vector<std::pair<const Cohort*, const Cohort*>> all_pairs(const std::vector<const Cohort*>& years) {
  std::vector<std::pair<const Cohort*, const Cohort*>> pairs;
  for (std::size_t i = 0; i < years.size(); ++i) {
    for (std::size_t j = i + 1; j < years.size(); ++j) pairs.emplace_back(years[i], years[j]);
  }
  return pairs;
}

}  // namespace

GapCurve gap_curve(std::span<const Cohort> cohorts, const FeatureMatrix& features, const PairOptions& options) {
  const auto years = numeric_cohorts(cohorts);
  if (years.size() < 3) throw DataError("gap curve needs at least 3 year cohorts");
  const auto pairs = all_pairs(years);

  GapCurve curve;
  curve.kind = features.kind();
  curve.pairs.resize(pairs.size());
  parallel_for(pairs.size(), options.threads, [&](std::size_t i) {
    curve.pairs[i] = run_pair(*pairs[i].first, *pairs[i].second, features, options);
  });

  std::map<long, std::vector<double>> by_gap;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    by_gap[year_gap(*pairs[i].first, *pairs[i].second)].push_back(curve.pairs[i].similarity);
  }
  for (const auto& [gap, values] : by_gap) {
    curve.points.push_back({gap, values.size(), stats::mean(values), stats::sample_std(values)});
  }
  return curve;
}

AlignmentProfile align_cohort(const Cohort& generated, std::span<const Cohort> cohorts, const FeatureMatrix& features,
                              const PairOptions& options, std::optional<double> sigma0) {
  if (generated.messages.empty()) throw DataError("generated cohort '" + generated.label + "' is empty");
  const auto years = numeric_cohorts(cohorts);
  if (years.size() < 2) throw DataError("alignment needs at least 2 year cohorts");

  AlignmentProfile profile;
  profile.label = generated.label;
  profile.kind = features.kind();
  profile.pairs.resize(years.size());
  parallel_for(years.size(), options.threads,
               [&](std::size_t i) { profile.pairs[i] = run_pair(generated, *years[i], features, options); });

  std::vector<double> s;
  for (std::size_t i = 0; i < years.size(); ++i) {
    profile.per_year.emplace_back(years[i]->label, profile.pairs[i].similarity);
    s.push_back(profile.pairs[i].similarity);
  }
  profile.mean = stats::mean(s);
  profile.std = stats::sample_std(s);
  if (sigma0) profile.variance_test = stats::chi2_variance_test(s, *sigma0, stats::Alternative::less);
  return profile;
}

ShapUnit parse_shap_unit(std::string_view text) {
  if (text == "pair") return ShapUnit::pair;
  if (text == "gap") return ShapUnit::gap;
  throw std::invalid_argument("unknown SHAP sampling unit '" + std::string(text) + "'");
}

std::string_view to_string(ShapUnit unit) { return unit == ShapUnit::pair ? "pair" : "gap"; }

ShapTrendReport shap_trends(std::span<const Cohort> cohorts, const FeatureMatrix& features,
                            const PairOptions& options, ShapUnit unit) {
  if (features.kind() != FeatureKind::handcrafted) {
    throw std::invalid_argument("SHAP trends are defined for handcrafted features only");
  }
  const auto years = numeric_cohorts(cohorts);
  if (years.size() < 3) throw DataError("SHAP trends need at least 3 year cohorts");
  const auto pairs = all_pairs(years);
  const std::size_t d = features.cols();

  ShapTrendReport report;
  report.unit = unit;
  report.features = features.columns();
  report.pairs.resize(pairs.size());
  parallel_for(pairs.size(), options.threads, [&](std::size_t i) {
    const auto& [a, b] = pairs[i];
    PairImportance imp{a->label, b->label, year_gap(*a, *b), std::vector<double>(d, 0.0)};
    for (std::size_t run = 0; run < options.runs; ++run) {
      const auto data = prepare_run(*a, *b, features, options, run);
      const auto model = gbdt::train(data.train_x, data.train_y, features.columns(), options.train);
      const auto summary = shap::mean_abs_shap(shap::shap_values(model, data.test_x));
      for (std::size_t f = 0; f < d; ++f) imp.mean_abs[f] += summary.mean_abs[f];
    }
    for (auto& v : imp.mean_abs) v /= static_cast<double>(options.runs);
    report.pairs[i] = std::move(imp);
  });

  std::map<long, std::pair<std::size_t, std::vector<double>>> gaps;
  for (const auto& p : report.pairs) {
    auto& [count, sums] = gaps[p.gap];
    if (sums.empty()) sums.assign(d, 0.0);
    ++count;
    for (std::size_t f = 0; f < d; ++f) sums[f] += p.mean_abs[f];
  }
  for (auto& [gap, entry] : gaps) {
    for (auto& v : entry.second) v /= static_cast<double>(entry.first);
    report.by_gap.emplace_back(gap, entry.second);
  }

  for (std::size_t f = 0; f < d; ++f) {
    std::vector<double> sample;
    if (unit == ShapUnit::pair) {
      for (const auto& p : report.pairs) sample.push_back(p.mean_abs[f]);
    } else {
      for (const auto& g : report.by_gap) sample.push_back(g.second[f]);
    }
    ShapFeatureStat stat;
    stat.feature = report.features[f];
    stat.mean = stats::mean(sample);
    stat.std = stats::sample_std(sample);
    if (sample.size() >= 2 && stat.std > 0.0) {
      const auto t = stats::t_test_one_sample(sample, 0.0);
      stat.t = t.t;
      stat.p = t.p;
      stat.significant = t.p < 0.05;
    }
    report.stats.push_back(std::move(stat));
  }
  return report;
}

TrendReport liwc_trends(const std::vector<YearlyLexProfile>& profiles, const std::vector<std::string>& features) {
  if (profiles.size() < 3) throw DataError("trend analysis needs at least 3 years");
  std::vector<const YearlyLexProfile*> ordered;
  for (const auto& p : profiles) {
    if (!numeric_label(p.label)) throw DataError("profile label '" + p.label + "' is not a numeric year");
    ordered.push_back(&p);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* x, const auto* y) { return label_less(x->label, y->label); });

  TrendReport report;
  std::vector<double> years;
  for (const auto* p : ordered) {
    report.years.push_back(p->label);
    years.push_back(static_cast<double>(*numeric_label(p->label)));
  }

  std::vector<std::string> names = features;
  if (names.empty()) {
    for (const auto& [name, value] : ordered.front()->features()) names.push_back(name);
  }
  for (const auto& name : names) {
    std::vector<double> values;
    for (const auto* p : ordered) {
      const auto f = p->features();
      auto it = std::find_if(f.begin(), f.end(), [&](const auto& kv) { return kv.first == name; });
      if (it == f.end()) throw DataError("feature '" + name + "' missing from profile " + p->label);
      values.push_back(it->second);
    }
    TrendRow row;
    row.feature = name;
    row.slope = stats::ols_slope(years, values);
    const bool constant = std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); });
    if (!constant) {
      const auto c = stats::spearman(years, values);
      row.rho = c.rho;
      row.p = c.p;
      row.significant = c.p < 0.05;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace diastyle::experiment
