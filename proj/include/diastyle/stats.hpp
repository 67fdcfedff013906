#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace diastyle::stats {

struct Correlation {
  double rho = 0.0;
  double p = 1.0;
};

struct TTest {
  double t = 0.0;
  double p = 1.0;
};

enum class Alternative { less, greater, two_sided };
Alternative parse_alternative(std::string_view text);

struct VarianceTest {
  std::size_t n = 0;
  double sample_std = 0.0;
  double sigma0 = 0.0;
  double chi2 = 0.0;
  double p = 1.0;
  Alternative alternative = Alternative::less;
};

double mean(std::span<const double> v);
// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_std(std::span<const double> v);

// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> v);

// Pearson correlation of average ranks. Two-sided p from the t
// approximation with n - 2 degrees of freedom; when |rho| == 1 and n <= 10
// the exact permutation probability 2 / n! is reported instead. Throws
// std::invalid_argument on length mismatch, n < 3 or a constant input.
Correlation spearman(std::span<const double> x, std::span<const double> y);

// Least-squares slope. Throws std::invalid_argument for n < 2 or constant x.
double ols_slope(std::span<const double> x, std::span<const double> y);

// t = (mean - mu0) / (s / sqrt(n)), two-sided p with n - 1 df. Throws
// std::invalid_argument for n < 2 or zero variance.
TTest t_test_one_sample(std::span<const double> values, double mu0 = 0.0);

// chi2 = (n - 1) s^2 / sigma0^2 with s the sample std of `values`.
//   less      -> p = P(chi2_{n-1} <= chi2)
//   greater   -> p = P(chi2_{n-1} >= chi2)
//   two_sided -> p = 2 min(less, greater), capped at 1
// Under `less`, p near 1 means the spread is far from small, i.e. the
// scores are not temporally neutral.
VarianceTest chi2_variance_test(std::span<const double> values, double sigma0,
                                Alternative alternative = Alternative::less);
// Same test from a summary (n, sample std).
VarianceTest chi2_variance_test(std::size_t n, double sample_std, double sigma0,
                                Alternative alternative = Alternative::less);

}  // namespace diastyle::stats
