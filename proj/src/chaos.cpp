#include "mrtkit/chaos.hpp"

#include <cmath>
#include <stdexcept>

namespace mrtkit {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

}  // namespace

void ChaosExpansion::validate() const {
    for (const auto& term : terms) {
        if (term.order < 0 || term.order > kMaxOrder)
            throw std::invalid_argument("ChaosExpansion: order outside [0," +
                                        std::to_string(kMaxOrder) + "]");
        if (!std::isfinite(term.coeff))
            throw std::invalid_argument("ChaosExpansion: non-finite coefficient");
    }
}

double hermite(int n, double x) {
    if (n < 0) throw std::invalid_argument("hermite: order must be >= 0");
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = x;
    for (int k = 1; k < n; ++k) {
        const double next = x * cur - k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

std::vector<double> iterated_integral(const PathBundle& paths, const StepFunction& g, int n,
                                      const std::string& channel) {
    if (n < 1 || n > ChaosExpansion::kMaxOrder)
        throw std::invalid_argument("iterated_integral: unsupported order " + std::to_string(n));
    const TimeGrid& grid = paths.grid();
    const PathSeries& w = paths.channel(channel);
    const std::vector<double> gv = g.grid_values(grid);

    std::vector<double> out(paths.n_paths());
    std::vector<double> j(n + 1);
    for (int p = 0; p < paths.n_paths(); ++p) {
        auto row = w.row(p);
        std::fill(j.begin(), j.end(), 0.0);
        j[0] = 1.0;
        for (int m = 0; m < grid.steps; ++m) {
            const double incr = gv[m] * (row[m + 1] - row[m]);
            for (int k = n; k >= 1; --k) j[k] += j[k - 1] * incr;
        }
        out[p] = j[n];
    }
    return out;
}

double chaos_norm(const ChaosExpansion& expansion) {
    expansion.validate();
    double total = 0.0;
    double order0 = 0.0;
    for (const auto& term : expansion.terms)
        if (term.order == 0) order0 += term.coeff;
    total += order0 * order0;

    for (int n = 1; n <= ChaosExpansion::kMaxOrder; ++n) {
        const double fact = factorial(n);
        for (std::size_t a = 0; a < expansion.terms.size(); ++a) {
            if (expansion.terms[a].order != n) continue;
            for (std::size_t b = 0; b < expansion.terms.size(); ++b) {
                if (expansion.terms[b].order != n) continue;
                const double ip =
                    expansion.terms[a].kernel.inner(expansion.terms[b].kernel);
                total += fact * expansion.terms[a].coeff * expansion.terms[b].coeff *
                         std::pow(ip, n);
            }
        }
    }
    return total;
}

PathSeries doleans_exp(const PathBundle& paths, const StepFunction& h,
                       const std::string& channel) {
    const TimeGrid& grid = paths.grid();
    const PathSeries& w = paths.channel(channel);
    const std::vector<double> hv = h.grid_values(grid);
    const double dt = grid.dt();

    PathSeries y(paths.n_paths(), grid.points());
    for (int p = 0; p < paths.n_paths(); ++p) {
        auto w_row = w.row(p);
        auto y_row = y.row(p);
        double stoch = 0.0;
        double quad = 0.0;
        y_row[0] = 1.0;
        for (int m = 0; m < grid.steps; ++m) {
            stoch += hv[m] * (w_row[m + 1] - w_row[m]);
            quad += hv[m] * hv[m] * dt;
            y_row[m + 1] = std::exp(stoch - 0.5 * quad);
        }
    }
    return y;
}

ChaosTerm project_kernel(const ChaosTerm& term, const TimeGrid& grid, double window_hi) {
    if (grid.index_of(window_hi) < 0)
        throw std::invalid_argument("project_kernel: window end is not a grid point");
    ChaosTerm out = term;
    if (term.order > 0) out.kernel = term.kernel.restricted(window_hi);
    return out;
}

std::vector<double> evaluate(const ChaosExpansion& expansion, const PathBundle& paths,
                             const std::string& channel) {
    expansion.validate();
    std::vector<double> out(paths.n_paths(), 0.0);
    for (const auto& term : expansion.terms) {
        if (term.order == 0) {
            for (double& v : out) v += term.coeff;
            continue;
        }
        const double scale = term.coeff * factorial(term.order);
        const std::vector<double> j = iterated_integral(paths, term.kernel, term.order, channel);
        for (int p = 0; p < paths.n_paths(); ++p) out[p] += scale * j[p];
    }
    return out;
}

}  // namespace mrtkit
