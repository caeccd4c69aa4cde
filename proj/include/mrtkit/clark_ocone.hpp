#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mrtkit/functionals.hpp"
#include "mrtkit/path_bundle.hpp"
#include "mrtkit/step_function.hpp"

namespace mrtkit {

// Predictable integrand values, one block per driving channel. Block "W"
// multiplies Brownian increments, block "N" multiplies compensated-jump
// increments; both hold one value per path per left grid point.
struct IntegrandEstimate {
    enum class Method { ClosedForm, Regression };

    TimeGrid grid;
    std::uint64_t seed = 0;
    std::map<std::string, PathSeries> blocks;
    Method method = Method::ClosedForm;
    int basis_degree = 0;
    // exact E(F) where the catalog provides it; reconstruction falls back
    // to the cross-path mean when absent
    std::optional<double> analytic_mean;
};

struct ReconstructionReport {
    double mean_F = 0.0;
    double rel_l2_error = 0.0;
    double abs_l2_error = 0.0;
    int n_paths = 0;
    int steps = 0;
    std::uint64_t seed = 0;
};

// Closed-form integrand catalog (ids and their integrands):
//   "W_T"       -> 1
//   "W_T2"      -> 2 W_t
//   "exp_W_T"   -> exp(W_t - t/2)     [functional exp(W_T - T/2)]
//   "doleans"   -> Y_t h(t)           [needs h]
//   "Ntilde_T"  -> 1                  (jump block)
//   "Ntilde_T2" -> 2 Nbar_t + 1       (jump block, unit marks)
IntegrandEstimate co_integrand_closed(const std::string& f_id, const PathBundle& paths,
                                      const StepFunction* doleans_h = nullptr);

// terminal samples of a catalog functional, for feeding reconstruction
std::vector<double> co_catalog_samples(const std::string& f_id, const PathBundle& paths,
                                       const StepFunction* doleans_h = nullptr);
bool co_catalog_is_jump(const std::string& f_id);

// Step-by-step OLS of the pathwise derivative samples on the monomial basis
// {1, W_t, ..., W_t^degree}; fitted values are the integrand estimate.
IntegrandEstimate co_integrand_regress(const PathFunctional& F, const PathBundle& paths,
                                       int degree);

// F_hat = mean + sum phi dW (+ sum psi dNbar when a jump block is present);
// errors are L2 over paths, relative and absolute.
ReconstructionReport co_reconstruct(const std::vector<double>& f_samples,
                                    const IntegrandEstimate& integrand,
                                    const PathBundle& paths);

// Two-block closed-form integrands on a bundle carrying both a Brownian and
// a compensated-jump channel. Ids: "W_T", "Ntilde_T", "W_T+Ntilde_T",
// "W_T*Ntilde_T", "Ntilde_T2".
IntegrandEstimate co_levy(const std::string& f_id, const PathBundle& paths);
std::vector<double> co_levy_samples(const std::string& f_id, const PathBundle& paths);

// Regression route for mixed functionals on unit-mark bundles: Brownian
// samples from the pathwise derivative, jump samples from the one-jump
// difference, tensor basis in (W_t, Nbar_t).
IntegrandEstimate co_levy_regress(const PathFunctional& F, const PathBundle& paths, int degree);

struct HedgeReport {
    double c0 = 0.0;
    double terminal_rel_error = 0.0;
    double mean_abs_delta_dev = 0.0;  // vs Black-Scholes delta, t in [0.1T, 0.9T]
    int n_paths = 0;
    int steps = 0;
    std::uint64_t seed = 0;
    std::vector<double> delta_dev_by_step;
};

// Risk-neutral GBM hedge of a European call: the stock holding comes from
// the conditional-expectation integrand of the discounted payoff (delta
// samples regressed on the current state), the bond holding from the budget
// identity, and the portfolio is rolled self-financed to T. K = 0 payoffs
// are linear and hedge exactly with one unit of stock.
HedgeReport replicate_bs(double strike, double rate, double sigma, double s0,
                         const TimeGrid& grid, int n_paths, std::uint64_t seed,
                         int degree = 5);

double black_scholes_delta(double s, double strike, double rate, double sigma, double tau);

// compensated-jump channel of a bundle: "Nbar" or "compjump"
const std::string& jump_channel_of(const PathBundle& paths);
bool has_unit_marks(const PathBundle& paths);

}  // namespace mrtkit
