#pragma once

#include <span>
#include <vector>

namespace htlob::stats {

double mean(std::span<const double> x);
// Unbiased sample variance.
double variance(std::span<const double> x);
// Biased (divide by n) autocovariance at `lag`, around the full-sample mean.
double autocovariance(std::span<const double> x, std::size_t lag);
// Biased cross-covariance sum_{i} (x_i - mx)(y_{i+lag} - my) / n over the common length.
double cross_covariance(std::span<const double> x, std::span<const double> y, std::size_t lag);

double normal_cdf(double z);

// Kolmogorov-Smirnov distance of a sample against N(mean, sd^2).
double ks_normal(std::vector<double> sample, double mean, double sd);
// Two-sample KS distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
// Asymptotic 5% critical values.
double ks_critical_one_sample(std::size_t n, double level = 0.05);
double ks_critical_two_sample(std::size_t n, std::size_t m, double level = 0.05);

// Ordinary least squares slope and its standard error.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace htlob::stats
