#pragma once

#include <string>
#include <vector>

#include "mrtkit/path_bundle.hpp"
#include "mrtkit/step_function.hpp"

namespace mrtkit {

// One term c * I_n(g tensor n); order-0 terms carry only the coefficient.
struct ChaosTerm {
    int order = 0;
    double coeff = 0.0;
    StepFunction kernel;
};

struct ChaosExpansion {
    static constexpr int kMaxOrder = 3;
    std::vector<ChaosTerm> terms;

    void validate() const;
};

// Probabilists' Hermite polynomial, three-term recurrence.
double hermite(int n, double x);

// Per-path terminal value of the order-n iterated integral of g over the
// time simplex, via the forward recursion
//   J_k(t_{m+1}) = J_k(t_m) + J_{k-1}(t_m) * g(t_m) * dW_m,  J_0 = 1,
// with left-point evaluation. Supported orders: 1..3.
std::vector<double> iterated_integral(const PathBundle& paths, const StepFunction& g, int n,
                                      const std::string& channel = "W.0");

// Squared chaos norm: sum over orders n of n! <f_n, f_n>, with tensor-power
// inner products <g^n, h^n> = <g,h>^n; order-0 mass is (sum of coeffs)^2.
double chaos_norm(const ChaosExpansion& expansion);

// Exponential martingale path Y_t = exp(int h dW - 1/2 int h^2 ds) with
// left-point sums; Y_0 = 1. Returns n_paths x (M+1) values.
PathSeries doleans_exp(const PathBundle& paths, const StepFunction& h,
                       const std::string& channel = "W.0");

// Conditional projection onto the window [0, hi]: every kernel argument is
// clipped by the window indicator. hi must be a grid point.
ChaosTerm project_kernel(const ChaosTerm& term, const TimeGrid& grid, double window_hi);

// Per-path value of the expansion: sum of c * n! * J_n(g^n) plus constants.
std::vector<double> evaluate(const ChaosExpansion& expansion, const PathBundle& paths,
                             const std::string& channel = "W.0");

}  // namespace mrtkit
