#pragma once

#include <vector>

#include "mrtkit/time_grid.hpp"

namespace mrtkit {

// Piecewise-constant function on [0,T] with left-continuous evaluation at
// breakpoints. Value is 0 beyond the last breakpoint.
class StepFunction {
public:
    StepFunction();
    StepFunction(std::vector<double> breaks, std::vector<double> vals);

    static StepFunction constant(double value, double horizon);
    // value on [lo, hi], 0 elsewhere
    static StepFunction indicator(double lo, double hi, double horizon, double value = 1.0);

    double value(double t) const;

    // Per-interval values on a grid, sampled at interval midpoints, for use
    // in left-point sums. Breakpoints are expected to sit on grid points.
    std::vector<double> grid_values(const TimeGrid& grid) const;

    double squared_norm() const;                    // integral of g^2, exact
    double inner(const StepFunction& other) const;  // integral of g*h, exact

    // multiply by the indicator of [0, hi]
    StepFunction restricted(double hi) const;

    const std::vector<double>& breaks() const { return breaks_; }
    const std::vector<double>& vals() const { return vals_; }

private:
    std::vector<double> breaks_;  // strictly increasing, starts at 0
    std::vector<double> vals_;    // one per interval
};

}  // namespace mrtkit
