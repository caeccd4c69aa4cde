#pragma once

#include <span>
#include <string>
#include <vector>

#include "mrtkit/clark_ocone.hpp"
#include "mrtkit/path_bundle.hpp"
#include "mrtkit/step_function.hpp"

namespace mrtkit {

// Drift descriptor for the change of measure. Three shapes, each with an
// analytically known pathwise derivative:
//   Constant      theta_t = c                         (D theta = 0)
//   Deterministic theta_t = h(t)                      (D theta = 0)
//   Frozen        theta_u = amp*g(scale*W_{t0}), u >= t0, 0 before
//                 (D_t theta(u) = amp*scale*g'(scale*W_{t0}) 1[t<=t0] 1[u>=t0])
struct ThetaSpec {
    enum class Kind { Constant, Deterministic, Frozen };
    enum class FrozenFn { Tanh, Sin };

    Kind kind = Kind::Constant;
    double constant = 0.0;
    StepFunction profile;
    double freeze_time = 0.0;
    FrozenFn fn = FrozenFn::Tanh;
    double amplitude = 1.0;
    double scale = 1.0;

    static ThetaSpec make_constant(double c);
    static ThetaSpec make_deterministic(StepFunction h);
    static ThetaSpec make_frozen(double t0, FrozenFn fn, double amplitude, double scale);

    bool is_deterministic() const { return kind != Kind::Frozen; }
    double bound() const;  // finite sup |theta|
    void validate(const TimeGrid& grid) const;

    // theta at the left grid points of one path (steps entries)
    void left_values(const PathBundle& paths, int path, std::span<double> out) const;
    // amp*scale*g'(scale*W_{t0}) for the frozen shape; 0 otherwise
    double frozen_gradient(const PathBundle& paths, int path) const;
};

struct MeasureChange {
    ThetaSpec theta;
    PathSeries Z;       // density path, Z_0 = 1, Z_t > 0
    PathSeries Lambda;  // reciprocal 1/Z_t
};

// Z_t = exp(-int theta dW - 1/2 int theta^2 ds), left-point sums.
MeasureChange density_path(const ThetaSpec& theta, const PathBundle& paths);

// copy of the bundle with channel "Wtilde" = W + int theta ds added
PathBundle drifted_bm(const PathBundle& paths, const ThetaSpec& theta);

// Integrand of the representation under the tilted measure:
//   E~(D_t F | F_t) - E~(F int_t^T D_t theta(u) dW~_u | F_t),
// all conditional expectations through the Bayes device
// E~(X|F_t) = Lambda_t E(X Z_T | F_t) with the cross-sectional regression
// estimator. With theta identically zero this reduces bit-for-bit to
// co_integrand_regress.
IntegrandEstimate gco_integrand(const PathFunctional& F, const MeasureChange& mc,
                                const PathBundle& paths, int degree);

struct WeightedReconstructionReport : ReconstructionReport {
    std::string measure = "Ptilde";
};

// F_hat = E~(F) + sum integrand dW~ with E~ the Z_T-weighted mean; errors
// are reported under the Z_T-weighted empirical measure.
WeightedReconstructionReport gco_reconstruct(const std::vector<double>& f_samples,
                                             const IntegrandEstimate& integrand,
                                             const MeasureChange& mc,
                                             const PathBundle& paths);

// Reduced two-channel change of measure: deterministic Brownian drift u and
// deterministic jump thinning theta(s) <= 1. The reconstruction runs against
// W^Q = W + int u ds and the jump channel with its compensator shifted by
// theta; expectations are Z_T-weighted.
struct LevyGcoResult {
    IntegrandEstimate integrand;
    std::vector<double> weights;  // Z_T per path
    WeightedReconstructionReport report;
};

LevyGcoResult gco_levy_reduced(const std::string& f_id, const StepFunction& u,
                               const StepFunction& theta, const PathBundle& paths);

}  // namespace mrtkit
