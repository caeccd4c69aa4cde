#include "mrtkit/step_function.hpp"

#include <algorithm>
#include <stdexcept>

namespace mrtkit {

StepFunction::StepFunction() : breaks_{0.0, 1.0}, vals_{0.0} {}

StepFunction::StepFunction(std::vector<double> breaks, std::vector<double> vals)
    : breaks_(std::move(breaks)), vals_(std::move(vals)) {
    if (breaks_.size() < 2 || vals_.size() + 1 != breaks_.size())
        throw std::invalid_argument("StepFunction: need n+1 breaks for n interval values");
    if (breaks_.front() != 0.0)
        throw std::invalid_argument("StepFunction: first breakpoint must be 0");
    for (std::size_t i = 1; i < breaks_.size(); ++i)
        if (!(breaks_[i] > breaks_[i - 1]))
            throw std::invalid_argument("StepFunction: breakpoints must be strictly increasing");
}

StepFunction StepFunction::constant(double value, double horizon) {
    return StepFunction({0.0, horizon}, {value});
}

StepFunction StepFunction::indicator(double lo, double hi, double horizon, double value) {
    if (!(0.0 <= lo && lo < hi && hi <= horizon))
        throw std::invalid_argument("StepFunction: bad indicator window");
    std::vector<double> breaks{0.0};
    std::vector<double> vals;
    if (lo > 0.0) {
        breaks.push_back(lo);
        vals.push_back(0.0);
    }
    breaks.push_back(hi);
    vals.push_back(value);
    if (hi < horizon) {
        breaks.push_back(horizon);
        vals.push_back(0.0);
    }
    return StepFunction(std::move(breaks), std::move(vals));
}

double StepFunction::value(double t) const {
    if (t <= breaks_.front()) return vals_.front();
    if (t > breaks_.back()) return 0.0;
    // left-continuous: interval (b_i, b_{i+1}] carries vals_[i]
    const auto it = std::lower_bound(breaks_.begin(), breaks_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - breaks_.begin()) - 1;
    return vals_[i];
}

std::vector<double> StepFunction::grid_values(const TimeGrid& grid) const {
    std::vector<double> out(grid.steps);
    for (int m = 0; m < grid.steps; ++m) {
        const double mid = 0.5 * (grid.time(m) + grid.time(m + 1));
        if (mid > breaks_.back()) {
            out[m] = 0.0;
            continue;
        }
        const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), mid);
        const std::size_t i = static_cast<std::size_t>(it - breaks_.begin()) - 1;
        out[m] = vals_[std::min(i, vals_.size() - 1)];
    }
    return out;
}

double StepFunction::squared_norm() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < vals_.size(); ++i)
        acc += vals_[i] * vals_[i] * (breaks_[i + 1] - breaks_[i]);
    return acc;
}

double StepFunction::inner(const StepFunction& other) const {
    // merge breakpoints and integrate piecewise
    std::vector<double> merged;
    merged.reserve(breaks_.size() + other.breaks_.size());
    std::merge(breaks_.begin(), breaks_.end(), other.breaks_.begin(), other.breaks_.end(),
               std::back_inserter(merged));
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
        const double mid = 0.5 * (merged[i] + merged[i + 1]);
        double a = 0.0, b = 0.0;
        if (mid <= breaks_.back()) {
            const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), mid);
            a = vals_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
        }
        if (mid <= other.breaks_.back()) {
            const auto it = std::upper_bound(other.breaks_.begin(), other.breaks_.end(), mid);
            b = other.vals_[static_cast<std::size_t>(it - other.breaks_.begin()) - 1];
        }
        acc += a * b * (merged[i + 1] - merged[i]);
    }
    return acc;
}

StepFunction StepFunction::restricted(double hi) const {
    if (hi >= breaks_.back()) return *this;
    if (hi <= 0.0) return StepFunction({0.0, breaks_.back()}, {0.0});
    std::vector<double> breaks, vals;
    breaks.push_back(0.0);
    for (std::size_t i = 0; i < vals_.size(); ++i) {
        const double right = breaks_[i + 1];
        if (right < hi) {
            breaks.push_back(right);
            vals.push_back(vals_[i]);
        } else {
            if (hi > breaks.back()) {
                breaks.push_back(hi);
                vals.push_back(vals_[i]);
            }
            break;
        }
    }
    breaks.push_back(breaks_.back());
    vals.push_back(0.0);
    return StepFunction(std::move(breaks), std::move(vals));
}

}  // namespace mrtkit
