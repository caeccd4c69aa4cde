#pragma once

#include <cmath>
#include <span>

namespace mrtkit::stats {

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // unbiased
double stderr_of_mean(std::span<const double> x);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

// simple linear regression of y on x with intercept
SlopeFit ols_slope(std::span<const double> x, std::span<const double> y);
SlopeFit weighted_ols_slope(std::span<const double> x, std::span<const double> y,
                            std::span<const double> w);

double weighted_mean(std::span<const double> x, std::span<const double> w);
double weighted_variance(std::span<const double> x, std::span<const double> w);

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace mrtkit::stats
