#include "mrtkit/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mrtkit/malliavin.hpp"
#include "mrtkit/regression.hpp"
#include "mrtkit/stats.hpp"

namespace mrtkit {

namespace {

const std::string kBrownian = "W.0";

double frozen_g(ThetaSpec::FrozenFn fn, double x) {
    return fn == ThetaSpec::FrozenFn::Tanh ? std::tanh(x) : std::sin(x);
}

double frozen_g_prime(ThetaSpec::FrozenFn fn, double x) {
    if (fn == ThetaSpec::FrozenFn::Tanh) {
        const double t = std::tanh(x);
        return 1.0 - t * t;
    }
    return std::cos(x);
}

}  // namespace

ThetaSpec ThetaSpec::make_constant(double c) {
    ThetaSpec spec;
    spec.kind = Kind::Constant;
    spec.constant = c;
    return spec;
}

ThetaSpec ThetaSpec::make_deterministic(StepFunction h) {
    ThetaSpec spec;
    spec.kind = Kind::Deterministic;
    spec.profile = std::move(h);
    return spec;
}

ThetaSpec ThetaSpec::make_frozen(double t0, FrozenFn fn, double amplitude, double scale) {
    ThetaSpec spec;
    spec.kind = Kind::Frozen;
    spec.freeze_time = t0;
    spec.fn = fn;
    spec.amplitude = amplitude;
    spec.scale = scale;
    return spec;
}

double ThetaSpec::bound() const {
    switch (kind) {
        case Kind::Constant:
            return std::abs(constant);
        case Kind::Deterministic: {
            double b = 0.0;
            for (double v : profile.vals()) b = std::max(b, std::abs(v));
            return b;
        }
        case Kind::Frozen:
            return std::abs(amplitude);  // both shapes are bounded by 1
    }
    return 0.0;
}

void ThetaSpec::validate(const TimeGrid& grid) const {
    if (!std::isfinite(bound()))
        throw std::invalid_argument("ThetaSpec: drift is not bounded");
    if (kind == Kind::Frozen && grid.index_of(freeze_time) < 0)
        throw std::invalid_argument("ThetaSpec: freeze time is not on the grid");
}

void ThetaSpec::left_values(const PathBundle& paths, int path, std::span<double> out) const {
    const TimeGrid& grid = paths.grid();
    switch (kind) {
        case Kind::Constant:
            std::fill(out.begin(), out.end(), constant);
            return;
        case Kind::Deterministic: {
            const std::vector<double> hv = profile.grid_values(grid);
            std::copy(hv.begin(), hv.end(), out.begin());
            return;
        }
        case Kind::Frozen: {
            const int k0 = grid.index_of(freeze_time);
            const double w0 = paths.channel(kBrownian).at(path, k0);
            const double v = amplitude * frozen_g(fn, scale * w0);
            for (int m = 0; m < grid.steps; ++m)
                out[m] = grid.time(m) >= freeze_time ? v : 0.0;
            return;
        }
    }
}

double ThetaSpec::frozen_gradient(const PathBundle& paths, int path) const {
    if (kind != Kind::Frozen) return 0.0;
    const int k0 = paths.grid().index_of(freeze_time);
    const double w0 = paths.channel(kBrownian).at(path, k0);
    return amplitude * scale * frozen_g_prime(fn, scale * w0);
}

MeasureChange density_path(const ThetaSpec& theta, const PathBundle& paths) {
    const TimeGrid& grid = paths.grid();
    theta.validate(grid);
    const PathSeries& w = paths.channel(kBrownian);
    const int n = paths.n_paths();
    const double dt = grid.dt();

    MeasureChange mc;
    mc.theta = theta;
    mc.Z = PathSeries(n, grid.points());
    mc.Lambda = PathSeries(n, grid.points());

    std::vector<double> tv(grid.steps);
    for (int p = 0; p < n; ++p) {
        theta.left_values(paths, p, tv);
        auto w_row = w.row(p);
        auto z_row = mc.Z.row(p);
        auto l_row = mc.Lambda.row(p);
        double stoch = 0.0;
        double quad = 0.0;
        z_row[0] = 1.0;
        l_row[0] = 1.0;
        for (int m = 0; m < grid.steps; ++m) {
            if (!std::isfinite(tv[m]))
                throw std::invalid_argument("density_path: theta evaluated non-finite");
            stoch += tv[m] * (w_row[m + 1] - w_row[m]);
            quad += tv[m] * tv[m] * dt;
            z_row[m + 1] = std::exp(-stoch - 0.5 * quad);
            l_row[m + 1] = 1.0 / z_row[m + 1];
        }
    }
    return mc;
}

PathBundle drifted_bm(const PathBundle& paths, const ThetaSpec& theta) {
    const TimeGrid& grid = paths.grid();
    theta.validate(grid);
    const PathSeries& w = paths.channel(kBrownian);
    const int n = paths.n_paths();
    const double dt = grid.dt();

    PathSeries wt(n, grid.points());
    std::vector<double> tv(grid.steps);
    for (int p = 0; p < n; ++p) {
        theta.left_values(paths, p, tv);
        auto w_row = w.row(p);
        auto out = wt.row(p);
        double drift = 0.0;
        out[0] = w_row[0];
        for (int m = 0; m < grid.steps; ++m) {
            drift += tv[m] * dt;
            out[m + 1] = w_row[m + 1] + drift;
        }
    }
    return paths.with_channel("Wtilde", std::move(wt));
}

IntegrandEstimate gco_integrand(const PathFunctional& F, const MeasureChange& mc,
                                const PathBundle& paths, int degree) {
    if (degree < 1 || degree > 6)
        throw std::invalid_argument("gco_integrand: degree must lie in [1,6]");
    const TimeGrid& grid = paths.grid();
    const int n = paths.n_paths();
    if (n < 50 * (degree + 1))
        throw std::invalid_argument("gco_integrand: need at least 50*(degree+1) paths");
    if (mc.Z.n_paths() != n || mc.Z.n_cols() != grid.points())
        throw std::invalid_argument("gco_integrand: measure change does not match the bundle");
    if (!paths.has_channel("Wtilde") && !mc.theta.is_deterministic())
        throw std::invalid_argument("gco_integrand: frozen theta needs the 'Wtilde' channel");

    const PathSeries& w = paths.channel(kBrownian);
    const PathSeries deriv = malliavin_cylinder(F, paths);
    const int last = grid.steps;

    // correction factor per path: F * g'(W_{t0}) * (W~_T - W~_{t0}),
    // picked up by every t <= t0 (D_t theta vanishes after the freeze time)
    std::vector<double> correction(n, 0.0);
    int freeze_index = -1;
    if (!mc.theta.is_deterministic()) {
        freeze_index = grid.index_of(mc.theta.freeze_time);
        const PathSeries& wt = paths.channel("Wtilde");
        for (int p = 0; p < n; ++p) {
            PathView pv(paths, p);
            correction[p] = F.eval(pv) * mc.theta.frozen_gradient(paths, p) *
                            (wt.at(p, last) - wt.at(p, freeze_index));
        }
    }

    IntegrandEstimate est;
    est.grid = grid;
    est.seed = paths.seed();
    est.method = IntegrandEstimate::Method::Regression;
    est.basis_degree = degree;
    PathSeries phi(n, grid.steps);

    // the frozen state enters the conditioning once it is observed
    const bool two_state = freeze_index >= 0;
    const int cols1 = degree + 1;
    const int cols2 = two_state ? tensor_basis_size(degree) : cols1;
    DesignMatrix design(n, std::max(cols1, cols2));
    Eigen::VectorXd y(n), fitted(n);

    for (int m = 0; m < grid.steps; ++m) {
        const bool after_freeze = two_state && m >= freeze_index;
        const int cols = after_freeze ? cols2 : cols1;
        auto block = design.leftCols(cols);
        for (int p = 0; p < n; ++p) {
            if (after_freeze)
                fill_tensor_monomials(w.at(p, m), w.at(p, freeze_index), degree,
                                      design.row(p).data());
            else
                fill_monomials(w.at(p, m), degree, design.row(p).data());
        }
        // main term: Lambda_t * fit(D_t F * Z_T)
        for (int p = 0; p < n; ++p) y(p) = deriv.at(p, m) * mc.Z.at(p, last);
        const Eigen::VectorXd beta = least_squares(block, y, m);
        fitted = block * beta;
        for (int p = 0; p < n; ++p) phi.at(p, m) = mc.Lambda.at(p, m) * fitted(p);

        // correction term, only while D_t theta is alive
        if (two_state && m <= freeze_index && freeze_index > 0) {
            for (int p = 0; p < n; ++p) y(p) = correction[p] * mc.Z.at(p, last);
            const Eigen::VectorXd cbeta = least_squares(block, y, m);
            fitted = block * cbeta;
            for (int p = 0; p < n; ++p)
                phi.at(p, m) -= mc.Lambda.at(p, m) * fitted(p);
        }
    }
    est.blocks.emplace("W", std::move(phi));
    return est;
}

WeightedReconstructionReport gco_reconstruct(const std::vector<double>& f_samples,
                                             const IntegrandEstimate& integrand,
                                             const MeasureChange& mc,
                                             const PathBundle& paths) {
    const TimeGrid& grid = paths.grid();
    if (!(integrand.grid == grid) || integrand.seed != paths.seed())
        throw std::invalid_argument("gco_reconstruct: integrand and bundle disagree on grid/seed");
    const int n = paths.n_paths();
    if (static_cast<int>(f_samples.size()) != n)
        throw std::invalid_argument("gco_reconstruct: sample count mismatch");
    const PathSeries& wt = paths.channel("Wtilde");
    const PathSeries& phi = integrand.blocks.at("W");
    const int last = grid.steps;

    std::vector<double> weights(n);
    for (int p = 0; p < n; ++p) weights[p] = mc.Z.at(p, last);
    const double tilted_mean = stats::weighted_mean(f_samples, weights);

    double num = 0.0, den = 0.0, wsum = 0.0;
    for (int p = 0; p < n; ++p) {
        auto row = wt.row(p);
        double acc = tilted_mean;
        for (int m = 0; m < grid.steps; ++m)
            acc += phi.at(p, m) * (row[m + 1] - row[m]);
        const double e = f_samples[p] - acc;
        num += weights[p] * e * e;
        den += weights[p] * f_samples[p] * f_samples[p];
        wsum += weights[p];
    }

    WeightedReconstructionReport report;
    report.mean_F = tilted_mean;
    report.abs_l2_error = std::sqrt(num / wsum);
    report.rel_l2_error = den > 0.0 ? std::sqrt(num / den) : report.abs_l2_error;
    report.n_paths = n;
    report.steps = grid.steps;
    report.seed = paths.seed();
    report.measure = "Ptilde";
    return report;
}

LevyGcoResult gco_levy_reduced(const std::string& f_id, const StepFunction& u,
                               const StepFunction& theta, const PathBundle& paths) {
    const TimeGrid& grid = paths.grid();
    const int n = paths.n_paths();
    const std::vector<double> uv = u.grid_values(grid);
    const std::vector<double> tv = theta.grid_values(grid);
    for (double v : tv)
        if (v > 1.0)
            throw std::invalid_argument("gco_levy_reduced: theta must be <= 1");
    if (!paths.levy_spec())
        throw std::invalid_argument("gco_levy_reduced: bundle carries no jump intensity");

    const bool null_change =
        std::all_of(uv.begin(), uv.end(), [](double v) { return v == 0.0; }) &&
        std::all_of(tv.begin(), tv.end(), [](double v) { return v == 0.0; });

    LevyGcoResult result;
    result.integrand = co_levy(f_id, paths);
    result.weights.assign(n, 1.0);

    const double lambda = paths.levy_spec()->lambda;
    const double mean_mark = paths.levy_spec()->marks.moment(1);
    const double dt = grid.dt();
    const int last = grid.steps;

    if (null_change) {
        const std::vector<double> samples = co_levy_samples(f_id, paths);
        const ReconstructionReport base = co_reconstruct(samples, result.integrand, paths);
        static_cast<ReconstructionReport&>(result.report) = base;
        result.report.measure = "Q";
        return result;
    }

    // density: Brownian drift factor and deterministic jump thinning factor
    const PathSeries& w = paths.channel(kBrownian);
    for (int p = 0; p < n; ++p) {
        auto w_row = w.row(p);
        double stoch = 0.0, quad = 0.0, comp = 0.0;
        for (int m = 0; m < grid.steps; ++m) {
            stoch += uv[m] * (w_row[m + 1] - w_row[m]);
            quad += uv[m] * uv[m] * dt;
            comp += tv[m] * dt;
        }
        double thinning = std::exp(lambda * comp);
        for (std::size_t j = 0; j < paths.jump_records()[p].times.size(); ++j) {
            const double tj = paths.jump_records()[p].times[j];
            thinning *= 1.0 - theta.value(tj);
        }
        result.weights[p] = std::exp(-stoch - 0.5 * quad) * thinning;
    }

    // reconstruction against the shifted drivers
    const std::vector<double> samples = co_levy_samples(f_id, paths);
    const double tilted_mean = stats::weighted_mean(samples, result.weights);
    const PathSeries& nbar = paths.channel(jump_channel_of(paths));
    const PathSeries& phi = result.integrand.blocks.at("W");
    const PathSeries& psi = result.integrand.blocks.at("N");

    double num = 0.0, den = 0.0, wsum = 0.0;
    for (int p = 0; p < n; ++p) {
        auto w_row = w.row(p);
        auto n_row = nbar.row(p);
        double acc = tilted_mean;
        for (int m = 0; m < grid.steps; ++m) {
            const double dwq = (w_row[m + 1] - w_row[m]) + uv[m] * dt;
            const double dnq = (n_row[m + 1] - n_row[m]) + tv[m] * lambda * mean_mark * dt;
            acc += phi.at(p, m) * dwq + psi.at(p, m) * dnq;
        }
        const double e = samples[p] - acc;
        const double wgt = result.weights[p];
        num += wgt * e * e;
        den += wgt * samples[p] * samples[p];
        wsum += wgt;
    }

    result.report.mean_F = tilted_mean;
    result.report.abs_l2_error = std::sqrt(num / wsum);
    result.report.rel_l2_error =
        den > 0.0 ? std::sqrt(num / den) : result.report.abs_l2_error;
    result.report.n_paths = n;
    result.report.steps = last;
    result.report.seed = paths.seed();
    result.report.measure = "Q";
    return result;
}

}  // namespace mrtkit
