/// @file stats.hpp
/// @brief Order-independent accumulation, Monte Carlo summaries, KS tests and slope fits.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "harris/random.hpp"

namespace harris {

/// Mean with its standard error.
struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

/// Pairwise (cascade) summation. The result depends only on the order of `x`, never on threading.
double pairwise_sum(std::span<const double> x);

/// Sample mean and standard error of the mean (sample variance with n - 1).
Estimate mean_se(std::span<const double> x);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic 95% critical value 1.3581 * sqrt((n + m) / (n m)).
double ks_threshold_95(std::size_t n, std::size_t m);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double intercept_se = 0.0;
};

/// Ordinary least squares y = intercept + slope x. Standard errors use the residual variance and are
/// NaN for fewer than three points.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Weighted least squares with weights 1 / se^2; standard errors from the weights alone.
LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> se);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool degenerate = false;
};

/// Least-squares slope of log(metric) against log(delta) with a percentile bootstrap 95% interval.
///
/// Rows are resampled by drawing each metric from N(mean, se) in log space. Fewer than three
/// rows, or any nonpositive metric, yields a degenerate fit.
SlopeFit loglog_slope(std::span<const double> delta, std::span<const double> metric,
                      std::span<const double> metric_se, RandomStream rng, int bootstrap = 2000);

/// E max of n iid chi-square(1) variables by quadrature of the survival function.
double expected_max_chi2(std::size_t n);

}  // namespace harris
