#include "mrtkit/clark_ocone.hpp"

#include <cmath>
#include <stdexcept>

#include "mrtkit/chaos.hpp"
#include "mrtkit/malliavin.hpp"
#include "mrtkit/regression.hpp"
#include "mrtkit/sim_paths.hpp"
#include "mrtkit/stats.hpp"

namespace mrtkit {

namespace {

const std::string kBrownian = "W.0";

void require_channel(const PathBundle& paths, const std::string& name, const char* who) {
    if (!paths.has_channel(name))
        throw std::invalid_argument(std::string(who) + ": bundle is missing channel '" +
                                    name + "'");
}

double bundle_lambda(const PathBundle& paths) {
    return paths.levy_spec() ? paths.levy_spec()->lambda : 0.0;
}

double bundle_mark_moment(const PathBundle& paths, int i) {
    return paths.levy_spec() ? paths.levy_spec()->marks.moment(i) : 0.0;
}

// OLS fit of one cross-section; returns fitted values
void fit_step(const DesignMatrix& design, const Eigen::VectorXd& y, int step,
              Eigen::VectorXd& fitted) {
    const Eigen::VectorXd beta = least_squares(design, y, step);
    fitted = design * beta;
}

}  // namespace

const std::string& jump_channel_of(const PathBundle& paths) {
    static const std::string nbar = "Nbar";
    static const std::string compjump = "compjump";
    if (paths.has_channel(nbar)) return nbar;
    if (paths.has_channel(compjump)) return compjump;
    throw std::invalid_argument("bundle has no compensated-jump channel");
}

bool has_unit_marks(const PathBundle& paths) {
    if (!paths.levy_spec()) return false;
    const MarkLaw& law = paths.levy_spec()->marks;
    return law.kind == MarkLaw::Kind::Discrete && law.values.size() == 1 &&
           law.values[0] == 1.0;
}

IntegrandEstimate co_integrand_closed(const std::string& f_id, const PathBundle& paths,
                                      const StepFunction* doleans_h) {
    const TimeGrid& grid = paths.grid();
    const int n = paths.n_paths();

    IntegrandEstimate est;
    est.grid = grid;
    est.seed = paths.seed();
    est.method = IntegrandEstimate::Method::ClosedForm;

    if (f_id == "W_T") {
        require_channel(paths, kBrownian, "co_integrand_closed");
        est.blocks.emplace("W", PathSeries(n, grid.steps, 1.0));
        est.analytic_mean = 0.0;
    } else if (f_id == "W_T2") {
        require_channel(paths, kBrownian, "co_integrand_closed");
        const PathSeries& w = paths.channel(kBrownian);
        PathSeries phi(n, grid.steps);
        for (int p = 0; p < n; ++p)
            for (int m = 0; m < grid.steps; ++m) phi.at(p, m) = 2.0 * w.at(p, m);
        est.blocks.emplace("W", std::move(phi));
        est.analytic_mean = grid.horizon;
    } else if (f_id == "exp_W_T") {
        require_channel(paths, kBrownian, "co_integrand_closed");
        const PathSeries& w = paths.channel(kBrownian);
        PathSeries phi(n, grid.steps);
        for (int p = 0; p < n; ++p)
            for (int m = 0; m < grid.steps; ++m)
                phi.at(p, m) = std::exp(w.at(p, m) - 0.5 * grid.time(m));
        est.blocks.emplace("W", std::move(phi));
        est.analytic_mean = 1.0;
    } else if (f_id == "doleans") {
        require_channel(paths, kBrownian, "co_integrand_closed");
        if (!doleans_h)
            throw std::invalid_argument("co_integrand_closed: 'doleans' needs a step function h");
        const PathSeries y = doleans_exp(paths, *doleans_h);
        const std::vector<double> hv = doleans_h->grid_values(grid);
        PathSeries phi(n, grid.steps);
        for (int p = 0; p < n; ++p)
            for (int m = 0; m < grid.steps; ++m) phi.at(p, m) = y.at(p, m) * hv[m];
        est.blocks.emplace("W", std::move(phi));
        est.analytic_mean = 1.0;
    } else if (f_id == "Ntilde_T") {
        jump_channel_of(paths);
        est.blocks.emplace("N", PathSeries(n, grid.steps, 1.0));
        est.analytic_mean = 0.0;
    } else if (f_id == "Ntilde_T2") {
        const std::string& jc = jump_channel_of(paths);
        if (!has_unit_marks(paths))
            throw std::invalid_argument("co_integrand_closed: 'Ntilde_T2' needs unit marks");
        const PathSeries& nbar = paths.channel(jc);
        PathSeries psi(n, grid.steps);
        for (int p = 0; p < n; ++p)
            for (int m = 0; m < grid.steps; ++m) psi.at(p, m) = 2.0 * nbar.at(p, m) + 1.0;
        est.blocks.emplace("N", std::move(psi));
        est.analytic_mean = bundle_lambda(paths) * grid.horizon;
    } else {
        throw std::invalid_argument("co_integrand_closed: unsupported functional id '" +
                                    f_id + "'");
    }
    return est;
}

std::vector<double> co_catalog_samples(const std::string& f_id, const PathBundle& paths,
                                       const StepFunction* doleans_h) {
    const TimeGrid& grid = paths.grid();
    const int n = paths.n_paths();
    const int last = grid.steps;
    std::vector<double> out(n);

    if (f_id == "W_T") {
        const PathSeries& w = paths.channel(kBrownian);
        for (int p = 0; p < n; ++p) out[p] = w.at(p, last);
    } else if (f_id == "W_T2") {
        const PathSeries& w = paths.channel(kBrownian);
        for (int p = 0; p < n; ++p) out[p] = w.at(p, last) * w.at(p, last);
    } else if (f_id == "exp_W_T") {
        const PathSeries& w = paths.channel(kBrownian);
        for (int p = 0; p < n; ++p)
            out[p] = std::exp(w.at(p, last) - 0.5 * grid.horizon);
    } else if (f_id == "doleans") {
        if (!doleans_h)
            throw std::invalid_argument("co_catalog_samples: 'doleans' needs a step function h");
        const PathSeries y = doleans_exp(paths, *doleans_h);
        for (int p = 0; p < n; ++p) out[p] = y.at(p, last);
    } else if (f_id == "Ntilde_T") {
        const PathSeries& nbar = paths.channel(jump_channel_of(paths));
        for (int p = 0; p < n; ++p) out[p] = nbar.at(p, last);
    } else if (f_id == "Ntilde_T2") {
        const PathSeries& nbar = paths.channel(jump_channel_of(paths));
        for (int p = 0; p < n; ++p) out[p] = nbar.at(p, last) * nbar.at(p, last);
    } else {
        throw std::invalid_argument("co_catalog_samples: unsupported functional id '" +
                                    f_id + "'");
    }
    return out;
}

bool co_catalog_is_jump(const std::string& f_id) {
    return f_id == "Ntilde_T" || f_id == "Ntilde_T2";
}

IntegrandEstimate co_integrand_regress(const PathFunctional& F, const PathBundle& paths,
                                       int degree) {
    if (degree < 1 || degree > 6)
        throw std::invalid_argument("co_integrand_regress: degree must lie in [1,6]");
    const int n = paths.n_paths();
    if (n < 50 * (degree + 1))
        throw std::invalid_argument("co_integrand_regress: need at least 50*(degree+1) paths");
    require_channel(paths, kBrownian, "co_integrand_regress");

    const TimeGrid& grid = paths.grid();
    const PathSeries& w = paths.channel(kBrownian);
    const PathSeries deriv = malliavin_cylinder(F, paths);

    IntegrandEstimate est;
    est.grid = grid;
    est.seed = paths.seed();
    est.method = IntegrandEstimate::Method::Regression;
    est.basis_degree = degree;
    PathSeries phi(n, grid.steps);

    DesignMatrix design(n, degree + 1);
    Eigen::VectorXd y(n), fitted(n);
    for (int m = 0; m < grid.steps; ++m) {
        for (int p = 0; p < n; ++p) {
            fill_monomials(w.at(p, m), degree, design.row(p).data());
            y(p) = deriv.at(p, m);
        }
        fit_step(design, y, m, fitted);
        for (int p = 0; p < n; ++p) phi.at(p, m) = fitted(p);
    }
    est.blocks.emplace("W", std::move(phi));
    return est;
}

ReconstructionReport co_reconstruct(const std::vector<double>& f_samples,
                                    const IntegrandEstimate& integrand,
                                    const PathBundle& paths) {
    const TimeGrid& grid = paths.grid();
    if (!(integrand.grid == grid) || integrand.seed != paths.seed())
        throw std::invalid_argument("co_reconstruct: integrand and bundle disagree on grid/seed");
    const int n = paths.n_paths();
    if (static_cast<int>(f_samples.size()) != n)
        throw std::invalid_argument("co_reconstruct: sample count mismatch");

    const double mean_f =
        integrand.analytic_mean ? *integrand.analytic_mean : stats::mean(f_samples);

    std::vector<double> recon(n, mean_f);
    for (const auto& [block, values] : integrand.blocks) {
        const std::string& channel = block == "W" ? kBrownian : jump_channel_of(paths);
        const PathSeries& drv = paths.channel(channel);
        for (int p = 0; p < n; ++p) {
            auto row = drv.row(p);
            double acc = 0.0;
            for (int m = 0; m < grid.steps; ++m)
                acc += values.at(p, m) * (row[m + 1] - row[m]);
            recon[p] += acc;
        }
    }

    double num = 0.0, den = 0.0;
    for (int p = 0; p < n; ++p) {
        const double e = f_samples[p] - recon[p];
        num += e * e;
        den += f_samples[p] * f_samples[p];
    }

    ReconstructionReport report;
    report.mean_F = mean_f;
    report.abs_l2_error = std::sqrt(num / n);
    report.rel_l2_error = den > 0.0 ? std::sqrt(num / den) : report.abs_l2_error;
    report.n_paths = n;
    report.steps = grid.steps;
    report.seed = paths.seed();
    return report;
}

IntegrandEstimate co_levy(const std::string& f_id, const PathBundle& paths) {
    require_channel(paths, kBrownian, "co_levy");
    const std::string& jc = jump_channel_of(paths);
    const TimeGrid& grid = paths.grid();
    const int n = paths.n_paths();

    IntegrandEstimate est;
    est.grid = grid;
    est.seed = paths.seed();
    est.method = IntegrandEstimate::Method::ClosedForm;
    PathSeries phi(n, grid.steps);  // Brownian block
    PathSeries psi(n, grid.steps);  // jump block

    if (f_id == "W_T") {
        for (int p = 0; p < n; ++p)
            for (int m = 0; m < grid.steps; ++m) phi.at(p, m) = 1.0;
        est.analytic_mean = 0.0;
    } else if (f_id == "Ntilde_T") {
        for (int p = 0; p < n; ++p)
            for (int m = 0; m < grid.steps; ++m) psi.at(p, m) = 1.0;
        est.analytic_mean = 0.0;
    } else if (f_id == "W_T+Ntilde_T") {
        for (int p = 0; p < n; ++p)
            for (int m = 0; m < grid.steps; ++m) {
                phi.at(p, m) = 1.0;
                psi.at(p, m) = 1.0;
            }
        est.analytic_mean = 0.0;
    } else if (f_id == "W_T*Ntilde_T") {
        const PathSeries& w = paths.channel(kBrownian);
        const PathSeries& nbar = paths.channel(jc);
        for (int p = 0; p < n; ++p)
            for (int m = 0; m < grid.steps; ++m) {
                phi.at(p, m) = nbar.at(p, m);
                psi.at(p, m) = w.at(p, m);
            }
        est.analytic_mean = 0.0;
    } else if (f_id == "Ntilde_T2") {
        if (!has_unit_marks(paths))
            throw std::invalid_argument("co_levy: 'Ntilde_T2' needs unit marks");
        const PathSeries& nbar = paths.channel(jc);
        for (int p = 0; p < n; ++p)
            for (int m = 0; m < grid.steps; ++m) psi.at(p, m) = 2.0 * nbar.at(p, m) + 1.0;
        est.analytic_mean = bundle_lambda(paths) * grid.horizon * bundle_mark_moment(paths, 2);
    } else {
        throw std::invalid_argument("co_levy: unsupported functional id '" + f_id + "'");
    }

    est.blocks.emplace("W", std::move(phi));
    est.blocks.emplace("N", std::move(psi));
    return est;
}

std::vector<double> co_levy_samples(const std::string& f_id, const PathBundle& paths) {
    const int n = paths.n_paths();
    const int last = paths.grid().steps;
    const PathSeries& w = paths.channel(kBrownian);
    const PathSeries& nbar = paths.channel(jump_channel_of(paths));

    std::vector<double> out(n);
    for (int p = 0; p < n; ++p) {
        const double wt = w.at(p, last);
        const double nt = nbar.at(p, last);
        if (f_id == "W_T") out[p] = wt;
        else if (f_id == "Ntilde_T") out[p] = nt;
        else if (f_id == "W_T+Ntilde_T") out[p] = wt + nt;
        else if (f_id == "W_T*Ntilde_T") out[p] = wt * nt;
        else if (f_id == "Ntilde_T2") out[p] = nt * nt;
        else
            throw std::invalid_argument("co_levy_samples: unsupported functional id '" +
                                        f_id + "'");
    }
    return out;
}

IntegrandEstimate co_levy_regress(const PathFunctional& F, const PathBundle& paths,
                                  int degree) {
    if (degree < 1 || degree > 6)
        throw std::invalid_argument("co_levy_regress: degree must lie in [1,6]");
    require_channel(paths, kBrownian, "co_levy_regress");
    const std::string& jc = jump_channel_of(paths);
    if (!has_unit_marks(paths))
        throw std::invalid_argument("co_levy_regress: regression route needs unit marks");

    const TimeGrid& grid = paths.grid();
    const int n = paths.n_paths();
    const int cols = tensor_basis_size(degree);
    if (n < 50 * cols)
        throw std::invalid_argument("co_levy_regress: need at least 50 paths per column");

    const PathSeries& w = paths.channel(kBrownian);
    const PathSeries& nbar = paths.channel(jc);
    const PathSeries deriv = malliavin_cylinder(F, paths);

    IntegrandEstimate est;
    est.grid = grid;
    est.seed = paths.seed();
    est.method = IntegrandEstimate::Method::Regression;
    est.basis_degree = degree;
    PathSeries phi(n, grid.steps);
    PathSeries psi(n, grid.steps);

    DesignMatrix design(n, cols);
    Eigen::VectorXd yw(n), yn(n), fitted(n);
    for (int m = 0; m < grid.steps; ++m) {
        // one extra unit jump placed just after the current step
        const double tau = grid.time(m + 1);
        const std::vector<double> diff = poisson_difference(F, paths, tau, 1.0);
        for (int p = 0; p < n; ++p) {
            fill_tensor_monomials(w.at(p, m), nbar.at(p, m), degree, design.row(p).data());
            yw(p) = deriv.at(p, m);
            yn(p) = diff[p];
        }
        fit_step(design, yw, m, fitted);
        for (int p = 0; p < n; ++p) phi.at(p, m) = fitted(p);
        fit_step(design, yn, m, fitted);
        for (int p = 0; p < n; ++p) psi.at(p, m) = fitted(p);
    }
    est.blocks.emplace("W", std::move(phi));
    est.blocks.emplace("N", std::move(psi));
    return est;
}

double black_scholes_delta(double s, double strike, double rate, double sigma, double tau) {
    if (strike <= 0.0) return 1.0;
    if (tau <= 0.0) return s > strike ? 1.0 : 0.0;
    const double d1 =
        (std::log(s / strike) + (rate + 0.5 * sigma * sigma) * tau) / (sigma * std::sqrt(tau));
    return stats::norm_cdf(d1);
}

HedgeReport replicate_bs(double strike, double rate, double sigma, double s0,
                         const TimeGrid& grid, int n_paths, std::uint64_t seed, int degree) {
    if (s0 <= 0.0) throw std::invalid_argument("replicate_bs: S_0 must be positive");
    if (sigma <= 0.0) throw std::invalid_argument("replicate_bs: sigma must be positive");
    if (strike < 0.0) throw std::invalid_argument("replicate_bs: strike must be >= 0");
    if (rate < 0.0) throw std::invalid_argument("replicate_bs: rate must be >= 0");

    const PathBundle bundle = gen_brownian(grid, n_paths, 1, seed);
    const PathSeries& w = bundle.channel(kBrownian);
    const int M = grid.steps;
    const double T = grid.horizon;
    const double dt = grid.dt();

    // risk-neutral GBM on the shared Brownian paths
    PathSeries s(n_paths, M + 1);
    for (int p = 0; p < n_paths; ++p) {
        auto w_row = w.row(p);
        auto s_row = s.row(p);
        for (int k = 0; k <= M; ++k)
            s_row[k] = s0 * std::exp((rate - 0.5 * sigma * sigma) * grid.time(k) +
                                     sigma * w_row[k]);
    }

    std::vector<double> payoff(n_paths);
    for (int p = 0; p < n_paths; ++p) payoff[p] = std::max(s.at(p, M) - strike, 0.0);

    // stock holding phi per step
    PathSeries phi(n_paths, M);
    double c0;
    if (strike == 0.0) {
        // linear payoff: one unit of stock replicates it exactly
        for (int p = 0; p < n_paths; ++p)
            for (int m = 0; m < M; ++m) phi.at(p, m) = 1.0;
        c0 = s0;
    } else {
        const double eps = 0.01 * strike;
        const SmoothedCall smooth(strike, eps);
        DesignMatrix design(n_paths, degree + 1);
        Eigen::VectorXd y(n_paths), fitted(n_paths);
        for (int m = 0; m < M; ++m) {
            const double tau = T - grid.time(m);
            for (int p = 0; p < n_paths; ++p) {
                fill_monomials(w.at(p, m), degree, design.row(p).data());
                // delta sample: discounted smoothed payoff slope times S_T/S_t
                y(p) = std::exp(-rate * tau) * smooth.slope(s.at(p, M)) * s.at(p, M) /
                       s.at(p, m);
            }
            fit_step(design, y, m, fitted);
            for (int p = 0; p < n_paths; ++p) phi.at(p, m) = fitted(p);
        }
        double disc = 0.0;
        for (int p = 0; p < n_paths; ++p) disc += payoff[p];
        c0 = std::exp(-rate * T) * disc / n_paths;
    }

    // self-financing rollout: bond holding from the budget identity
    std::vector<double> value(n_paths, c0);
    for (int m = 0; m < M; ++m) {
        const double growth = std::exp(rate * dt) - 1.0;
        for (int p = 0; p < n_paths; ++p) {
            const double stock = phi.at(p, m) * s.at(p, m);
            value[p] += phi.at(p, m) * (s.at(p, m + 1) - s.at(p, m)) +
                        (value[p] - stock) * growth;
        }
    }

    double num = 0.0, den = 0.0;
    for (int p = 0; p < n_paths; ++p) {
        const double e = value[p] - payoff[p];
        num += e * e;
        den += payoff[p] * payoff[p];
    }

    HedgeReport report;
    report.c0 = c0;
    report.n_paths = n_paths;
    report.steps = M;
    report.seed = seed;
    report.terminal_rel_error = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num / n_paths);
    report.delta_dev_by_step.assign(M, 0.0);
    double dev_acc = 0.0;
    int dev_steps = 0;
    for (int m = 0; m < M; ++m) {
        const double t = grid.time(m);
        double acc = 0.0;
        for (int p = 0; p < n_paths; ++p) {
            const double oracle = black_scholes_delta(s.at(p, m), strike, rate, sigma, T - t);
            acc += std::abs(phi.at(p, m) - oracle);
        }
        report.delta_dev_by_step[m] = acc / n_paths;
        if (t >= 0.1 * T && t <= 0.9 * T) {
            dev_acc += report.delta_dev_by_step[m];
            ++dev_steps;
        }
    }
    report.mean_abs_delta_dev = dev_steps > 0 ? dev_acc / dev_steps : 0.0;
    (void)dt;
    return report;
}

}  // namespace mrtkit
