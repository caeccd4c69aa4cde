#include "mrtkit/malliavin.hpp"

#include <cmath>
#include <stdexcept>

namespace mrtkit {

PathSeries malliavin_cylinder(const PathFunctional& F, const PathBundle& paths) {
    F.validate_on(paths.grid());
    PathSeries out(paths.n_paths(), paths.grid().points());
    for (int p = 0; p < paths.n_paths(); ++p) {
        PathView pv(paths, p);
        F.brownian_derivative_profile(pv, out.row(p));
    }
    return out;
}

ChaosExpansion malliavin_chaos(const ChaosExpansion& F, double t) {
    F.validate();
    ChaosExpansion out;
    for (const auto& term : F.terms) {
        if (term.order == 0) continue;
        ChaosTerm d;
        d.order = term.order - 1;
        d.coeff = term.order * term.coeff * term.kernel.value(t);
        d.kernel = term.kernel;
        out.terms.push_back(std::move(d));
    }
    return out;
}

std::vector<double> poisson_difference(const PathFunctional& F, const PathBundle& paths,
                                       double t, double z) {
    if (!paths.has_jump_records())
        throw std::invalid_argument("poisson_difference: bundle has no jump records");
    if (!(t > 0.0) || t > paths.grid().horizon)
        throw std::invalid_argument("poisson_difference: insertion time must lie in (0, T]");
    F.validate_on(paths.grid());

    std::vector<double> out(paths.n_paths());
    for (int p = 0; p < paths.n_paths(); ++p) {
        PathView base(paths, p);
        PathView bumped(paths, p, t, z);
        out[p] = F.eval(bumped) - F.eval(base);
    }
    return out;
}

std::vector<double> skorohod_adapted(const AdaptedProcess& u, const PathBundle& paths,
                                     const std::string& channel) {
    const PathSeries& w = paths.channel(channel);
    std::vector<double> out(paths.n_paths(), 0.0);
    for (int p = 0; p < paths.n_paths(); ++p) {
        PathView pv(paths, p);
        auto row = w.row(p);
        double acc = 0.0;
        for (int m = 0; m < paths.grid().steps; ++m)
            acc += u(pv, m) * (row[m + 1] - row[m]);
        out[p] = acc;
    }
    return out;
}

SobolevNorms sobolev_norms(const PathFunctional& F, const PathBundle& paths) {
    F.validate_on(paths.grid());
    const TimeGrid& grid = paths.grid();
    const double dt = grid.dt();
    const int n = paths.n_paths();

    double mean_f2 = 0.0, mean_abs = 0.0, mean_energy = 0.0, mean_root = 0.0;
    std::vector<double> profile(grid.points());
    for (int p = 0; p < n; ++p) {
        PathView pv(paths, p);
        const double f = F.eval(pv);
        F.brownian_derivative_profile(pv, profile);
        double energy = 0.0;
        for (int m = 0; m < grid.steps; ++m) energy += profile[m] * profile[m] * dt;
        mean_f2 += f * f;
        mean_abs += std::abs(f);
        mean_energy += energy;
        mean_root += std::sqrt(energy);
    }
    mean_f2 /= n;
    mean_abs /= n;
    mean_energy /= n;
    mean_root /= n;

    SobolevNorms norms;
    norms.d12 = std::sqrt(mean_f2 + mean_energy);
    norms.d11 = mean_abs + mean_root;
    return norms;
}

}  // namespace mrtkit
