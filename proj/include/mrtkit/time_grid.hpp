#pragma once

#include <cmath>
#include <stdexcept>

namespace mrtkit {

// Uniform grid t_k = k*T/M on [0,T].
struct TimeGrid {
    double horizon = 1.0;
    int steps = 1;

    TimeGrid() = default;
    TimeGrid(double T, int M) : horizon(T), steps(M) {
        if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
        if (M < 1) throw std::invalid_argument("TimeGrid: steps must be >= 1");
    }

    double dt() const { return horizon / steps; }
    int points() const { return steps + 1; }
    double time(int k) const { return k == steps ? horizon : k * dt(); }

    // index of a grid time, -1 if t does not sit on the grid
    int index_of(double t, double tol = 1e-9) const {
        const int k = static_cast<int>(std::lround(t / dt()));
        if (k < 0 || k > steps) return -1;
        return std::abs(t - time(k)) <= tol * std::max(1.0, horizon) ? k : -1;
    }

    bool operator==(const TimeGrid& o) const {
        return horizon == o.horizon && steps == o.steps;
    }
};

}  // namespace mrtkit
