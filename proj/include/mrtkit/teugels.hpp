#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mrtkit/path_bundle.hpp"
#include "mrtkit/sim_paths.hpp"

namespace mrtkit {

// Power-jump processes X^i_t = sum of (jump size)^i up to t (X^1 carries
// the drift and diffusion parts as well) and their compensated versions
// Y^i_t = X^i_t - m_i t.
struct PowerJumpFamily {
    int imax = 0;
    std::vector<double> moments;   // m_1..m_imax
    std::vector<PathSeries> X;     // X[i-1] holds X^i
    std::vector<PathSeries> Y;
};

PowerJumpFamily power_jump_paths(const LevySpec& spec, const PathBundle& paths, int imax);

// G_ij = m_{i+j} + sigma^2 for i=j=1, with m_k = lambda E[mark^k] for k >= 2
// and m_1 = drift + lambda E[mark].
Eigen::MatrixXd gram_matrix(const LevySpec& spec, int imax);

struct OrthoCoeffs {
    Eigen::MatrixXd a;             // lower unitriangular combination rows
    Eigen::VectorXd diag;          // G-norms of the combined rows
    std::vector<bool> degenerate;  // rows whose pivot fell below tol
};

// Gram-Schmidt in the G-inner product; degenerate pivots are flagged and
// their rows kept (they combine to the zero martingale).
OrthoCoeffs orthogonalize(const Eigen::MatrixXd& gram, double tol = 1e-10);

// H^i = sum_j a_ij Y^j evaluated on paths
std::vector<PathSeries> ortho_family_paths(const OrthoCoeffs& coeffs,
                                           const PowerJumpFamily& family);

struct PrpResidualReport {
    double rel_residual = 0.0;
    int columns = 0;
};

// Least-squares projection of the centered target onto predictable-basis
// integrals against the non-degenerate H martingales.
PrpResidualReport prp_residual(const std::vector<double>& target,
                               const std::vector<PathSeries>& H,
                               const std::vector<bool>& degenerate,
                               const PathBundle& paths, int degree);

// e^z - 1 for z < 0, 1 - e^{-z} for z > 0; undefined at 0.
double gamma_map(double z);

// Finite-mark jump process observed stage by stage: stage i waits an
// Exp(rate_i) time, then jumps with the stage's mark distribution.
struct MarkedStage {
    double rate = 1.0;
    std::vector<double> mark_probs;
};

struct MarkedProcessSpec {
    std::vector<double> mark_values;
    std::vector<MarkedStage> stages;
    void validate() const;
};

// channel "x" carries the current mark value (0 before the first jump);
// jump records carry the exact stage times and marks within [0,T]
PathBundle gen_marked(const MarkedProcessSpec& spec, const TimeGrid& grid, int n_paths,
                      std::uint64_t seed, const GenOptions& opt = {});

struct CompensatorPaths {
    PathSeries counts;       // p(t,A)
    PathSeries compensator;  // p~(t,A)
    PathSeries q;            // p - p~
};

// Counting process on the mark subset A (indices into mark_values), its
// stage-wise compensator rate_i * pi_i(A) * (elapsed stage time), and the
// compensated difference. Everything freezes once the stages are exhausted.
CompensatorPaths compensator_marked(const MarkedProcessSpec& spec,
                                    const std::vector<int>& mark_subset,
                                    const PathBundle& paths);

}  // namespace mrtkit
