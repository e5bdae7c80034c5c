#pragma once

#include <span>
#include <vector>

namespace qcv::stats {

double norm_pdf(double x);
double norm_cdf(double x);

/// Inverse standard normal CDF (Wichura's AS 241, double precision).
double norm_ppf(double p);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Upper-tail probability of a chi-square with df degrees of freedom.
double chi2_sf(double x, double df);

/// Log density of a Student-t with dof nu standardized to unit variance
/// (nu > 2), evaluated at x with variance sigma2.
double student_t_std_logpdf(double x, double sigma2, double nu);

double mean(std::span<const double> x);
/// Population variance (n denominator).
double variance(std::span<const double> x);
/// Sample variance (n-1 denominator).
double sample_variance(std::span<const double> x);
double std_dev(std::span<const double> x);
/// Biased moment skewness (n denominator).
double skewness(std::span<const double> x);
/// Raw fourth standardized moment; 3 under normality.
double kurtosis(std::span<const double> x);
double median(std::vector<double> x);

/// Pearson correlation of two equal-length samples.
double correlation(std::span<const double> x, std::span<const double> y);

/// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> ranks_average(std::span<const double> x);

/// Bartlett-kernel long-run variance of a demeaned sequence,
/// gamma_0 + 2 sum_{j<=bw} (1 - j/(bw+1)) gamma_j with n-denominators.
double long_run_variance(std::span<const double> x, int bandwidth);

}  // namespace qcv::stats
