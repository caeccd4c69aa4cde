#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mrtkit/chaos.hpp"
#include "mrtkit/functionals.hpp"

namespace mrtkit {

struct SobolevNorms {
    double d12 = 0.0;
    double d11 = 0.0;
};

// Pathwise derivative D_t F at every grid point: for cylinder functionals
// this is the gradient-times-indicator formula, extended to sums and
// products by linearity and the product rule.
PathSeries malliavin_cylinder(const PathFunctional& F, const PathBundle& paths);

// Derivative of a chaos expansion at time t: term (n, c, g) maps to
// (n-1, n*c*g(t), g); order-0 terms vanish.
ChaosExpansion malliavin_chaos(const ChaosExpansion& F, double t);

// Add-one-jump difference operator: F evaluated on the path with one extra
// jump of mark z at time t, minus F on the original path. Requires jump
// records on the bundle; t must lie in (0, T].
std::vector<double> poisson_difference(const PathFunctional& F, const PathBundle& paths,
                                       double t, double z);

// integrand supplied as a function of (path history, step index)
using AdaptedProcess = std::function<double(const PathView&, int)>;

// Left-point Ito sum of an adapted integrand; for adapted u this is the
// anticipative integral restricted to its classical value.
std::vector<double> skorohod_adapted(const AdaptedProcess& u, const PathBundle& paths,
                                     const std::string& channel = "W.0");

// d12 = sqrt(E F^2 + E int (D_t F)^2 dt), d11 = E|F| + E sqrt(int (D_t F)^2 dt),
// both estimated over the bundle's paths.
SobolevNorms sobolev_norms(const PathFunctional& F, const PathBundle& paths);

}  // namespace mrtkit
