#pragma once

// Regularized incomplete gamma and beta functions and the distributions
// built on them. Series / continued-fraction evaluation (modified Lentz),
// converged to ~1e-15 relative; intended accuracy 1e-10 absolute.
namespace diastyle::special {

// P(a, x) = gamma(a, x) / Gamma(a), lower tail. a > 0, x >= 0.
double gamma_p(double a, double x);
// Q(a, x) = 1 - P(a, x), computed directly for accuracy in the upper tail.
double gamma_q(double a, double x);
// I_x(a, b). a, b > 0, 0 <= x <= 1.
double beta_inc(double a, double b, double x);

// P(X <= x) for X ~ chi2(df).
double chi2_cdf(double x, double df);
double chi2_sf(double x, double df);

// P(T <= t) for Student t with df degrees of freedom.
double student_t_cdf(double t, double df);
// P(|T| >= |t|).
double student_t_two_sided(double t, double df);

}  // namespace diastyle::special
