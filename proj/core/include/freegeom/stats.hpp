#pragma once

#include <vector>

namespace freegeom::stats {

double mean(const std::vector<double>& x);
/// Unbiased sample variance.
double variance(const std::vector<double>& x);
double stderr_of_mean(const std::vector<double>& x);

double normal_cdf(double x);
/// Two-sided quantile helper: z such that P(|N| <= z) = level.
double normal_two_sided_z(double level);

/// Kolmogorov-Smirnov p-value of the sample against a centered normal with standard deviation sd.
double ks_normal_pvalue(std::vector<double> x, double sd);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for k successes out of n at the given two-sided confidence.
Interval wilson_interval(long k, long n, double confidence);

/// log(mean(exp(a))) without overflow.
double log_mean_exp(const std::vector<double>& a);

/// Effective sample size of unnormalized log-weights, (sum w)^2 / sum w^2.
double effective_sample_size(const std::vector<double>& log_w);

/// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace freegeom::stats
