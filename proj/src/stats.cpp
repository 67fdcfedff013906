#include "diastyle/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "diastyle/special_functions.hpp"

namespace diastyle::stats {

Alternative parse_alternative(std::string_view text) {
  if (text == "less") return Alternative::less;
  if (text == "greater") return Alternative::greater;
  if (text == "two-sided" || text == "two_sided") return Alternative::two_sided;
  throw std::invalid_argument("unknown alternative '" + std::string(text) + "'");
}

double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of an empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

namespace {

double pearson(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("correlation undefined for a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  if (x.size() < 3) throw std::invalid_argument("spearman: need at least 3 pairs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  Correlation out;
  out.rho = pearson(rx, ry);
  const std::size_t n = x.size();
  const double df = static_cast<double>(n - 2);
  if (std::abs(out.rho) >= 1.0) {
    if (n <= 10) {
      double factorial = 1.0;
      for (std::size_t k = 2; k <= n; ++k) factorial *= static_cast<double>(k);
      out.p = std::min(1.0, 2.0 / factorial);
    } else {
      out.p = 0.0;
    }
    return out;
  }
  const double t = out.rho * std::sqrt(df / (1.0 - out.rho * out.rho));
  out.p = special::student_t_two_sided(t, df);
  return out;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("ols_slope: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("ols_slope: need at least 2 points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols_slope: x is constant");
  return sxy / sxx;
}

TTest t_test_one_sample(std::span<const double> values, double mu0) {
  if (values.size() < 2) throw std::invalid_argument("t-test: need at least 2 values");
  const double s = sample_std(values);
  if (!(s > 0.0)) throw std::invalid_argument("t-test: zero variance");
  const double n = static_cast<double>(values.size());
  TTest out;
  out.t = (mean(values) - mu0) / (s / std::sqrt(n));
  out.p = special::student_t_two_sided(out.t, n - 1.0);
  return out;
}

VarianceTest chi2_variance_test(std::size_t n, double sample_std_value, double sigma0, Alternative alternative) {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("chi2 variance test: sigma0 must be positive");
  if (n < 2) throw std::invalid_argument("chi2 variance test: need at least 2 values");
  if (sample_std_value < 0.0) throw std::invalid_argument("chi2 variance test: negative std");
  VarianceTest out;
  out.n = n;
  out.sample_std = sample_std_value;
  out.sigma0 = sigma0;
  out.alternative = alternative;
  const double df = static_cast<double>(n - 1);
  out.chi2 = df * sample_std_value * sample_std_value / (sigma0 * sigma0);
  const double lower = special::chi2_cdf(out.chi2, df);
  const double upper = special::chi2_sf(out.chi2, df);
  switch (alternative) {
    case Alternative::less: out.p = lower; break;
    case Alternative::greater: out.p = upper; break;
    case Alternative::two_sided: out.p = std::min(1.0, 2.0 * std::min(lower, upper)); break;
  }
  return out;
}

VarianceTest chi2_variance_test(std::span<const double> values, double sigma0, Alternative alternative) {
  return chi2_variance_test(values.size(), sample_std(values), sigma0, alternative);
}

}  // namespace diastyle::stats
