#include "mrtkit/stats.hpp"

#include <stdexcept>

namespace mrtkit::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("stats::mean: empty sample");
    double acc = 0.0;
    for (double v : x) acc += v;
    return acc / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("stats::variance: need at least 2 samples");
    const double m = mean(x);
    double acc = 0.0;
    for (double v : x) acc += (v - m) * (v - m);
    return acc / static_cast<double>(x.size() - 1);
}

double stderr_of_mean(std::span<const double> x) {
    return std::sqrt(variance(x) / static_cast<double>(x.size()));
}

SlopeFit ols_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("stats::ols_slope: bad sample sizes");
    const double n = static_cast<double>(x.size());
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("stats::ols_slope: degenerate regressor");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        rss += r * r;
    }
    fit.slope_stderr = std::sqrt(rss / (n - 2.0) / sxx);
    return fit;
}

SlopeFit weighted_ols_slope(std::span<const double> x, std::span<const double> y,
                            std::span<const double> w) {
    if (x.size() != y.size() || x.size() != w.size() || x.size() < 3)
        throw std::invalid_argument("stats::weighted_ols_slope: bad sample sizes");
    double sw = 0.0;
    for (double v : w) sw += v;
    const double mx = [&] {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * x[i];
        return acc / sw;
    }();
    const double my = [&] {
        double acc = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) acc += w[i] * y[i];
        return acc / sw;
    }();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("stats::weighted_ols_slope: degenerate regressor");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    // sandwich-style error under the normalized weights
    double s2 = 0.0, wsq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        s2 += w[i] * w[i] * (x[i] - mx) * (x[i] - mx) * r * r;
        wsq += w[i];
    }
    (void)wsq;
    fit.slope_stderr = std::sqrt(s2) / sxx;
    return fit;
}

double weighted_mean(std::span<const double> x, std::span<const double> w) {
    if (x.size() != w.size() || x.empty())
        throw std::invalid_argument("stats::weighted_mean: bad sample sizes");
    double sw = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        acc += w[i] * x[i];
    }
    if (sw <= 0.0) throw std::invalid_argument("stats::weighted_mean: non-positive weight mass");
    return acc / sw;
}

double weighted_variance(std::span<const double> x, std::span<const double> w) {
    const double m = weighted_mean(x, w);
    double sw = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        acc += w[i] * (x[i] - m) * (x[i] - m);
    }
    return acc / sw;
}

}  // namespace mrtkit::stats
