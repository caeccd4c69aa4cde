#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mrtkit/sim_paths.hpp"
#include "mrtkit/stats.hpp"
#include "mrtkit/step_function.hpp"

using namespace mrtkit;

namespace {

std::vector<double> terminal(const PathBundle& b, const std::string& channel) {
    std::vector<double> out(b.n_paths());
    for (int p = 0; p < b.n_paths(); ++p) out[p] = b.channel(channel).at(p, b.grid().steps);
    return out;
}

}  // namespace

TEST_CASE("time grid validation and indexing") {
    CHECK_THROWS_AS(TimeGrid(0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(-1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), std::invalid_argument);

    const TimeGrid grid(2.0, 8);
    CHECK(grid.dt() == doctest::Approx(0.25));
    CHECK(grid.time(0) == 0.0);
    CHECK(grid.time(8) == 2.0);
    CHECK(grid.index_of(0.5) == 2);
    CHECK(grid.index_of(0.51) == -1);
    CHECK(grid.index_of(2.5) == -1);
}

TEST_CASE("brownian generation basics") {
    const TimeGrid grid(1.0, 256);
    CHECK_THROWS_AS(gen_brownian(grid, 0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_brownian(grid, 10, 0, 1), std::invalid_argument);

    const PathBundle b = gen_brownian(grid, 500, 2, 99);
    for (int p = 0; p < b.n_paths(); ++p) {
        CHECK(b.channel("W.0").at(p, 0) == 0.0);
        CHECK(b.channel("W.1").at(p, 0) == 0.0);
    }

    // bit-identical regeneration from the same seed
    const PathBundle b2 = gen_brownian(grid, 500, 2, 99);
    for (int p = 0; p < 500; p += 37)
        for (int k = 0; k <= grid.steps; ++k)
            CHECK(b.channel("W.1").at(p, k) == b2.channel("W.1").at(p, k));

    // different seed changes the draw
    const PathBundle b3 = gen_brownian(grid, 500, 1, 100);
    CHECK(b.channel("W.0").at(0, grid.steps) != b3.channel("W.0").at(0, grid.steps));
}

TEST_CASE("brownian chunked and threaded generation is bit-identical") {
    const TimeGrid grid(1.0, 64);
    const PathBundle whole = gen_brownian(grid, 600, 1, 7);

    GenOptions chunk;
    chunk.first_path = 200;
    const PathBundle part = gen_brownian(grid, 200, 1, 7, chunk);
    for (int p = 0; p < 200; ++p)
        for (int k = 0; k <= grid.steps; ++k)
            CHECK(part.channel("W.0").at(p, k) == whole.channel("W.0").at(p + 200, k));

    GenOptions threaded;
    threaded.threads = 4;
    const PathBundle par = gen_brownian(grid, 600, 1, 7, threaded);
    for (int p = 0; p < 600; p += 19)
        for (int k = 0; k <= grid.steps; ++k)
            CHECK(par.channel("W.0").at(p, k) == whole.channel("W.0").at(p, k));
}

TEST_CASE("brownian terminal law and quadratic variation") {
    const TimeGrid grid(1.0, 512);
    const int n = 20000;
    const PathBundle b = gen_brownian(grid, n, 1, 4242);

    const std::vector<double> wt = terminal(b, "W.0");
    CHECK(std::abs(stats::mean(wt)) < 3.0 * std::sqrt(1.0 / n));
    CHECK(stats::variance(wt) == doctest::Approx(1.0).epsilon(0.05));

    // QV concentration, oracle Var(sum dW^2) = 2 T dt: the 99% band is
    // 2.576 sigma wide, so at least ~98.5% of paths must land inside it
    const double sigma_qv = std::sqrt(2.0 * grid.horizon * grid.dt());
    int inside = 0;
    for (int p = 0; p < n; ++p) {
        auto row = b.channel("W.0").row(p);
        double qv = 0.0;
        for (int m = 0; m < grid.steps; ++m) {
            const double d = row[m + 1] - row[m];
            qv += d * d;
        }
        if (std::abs(qv - grid.horizon) <= 2.576 * sigma_qv) ++inside;
    }
    CHECK(static_cast<double>(inside) / n >= 0.985);
}

TEST_CASE("quadratic variation within 10 percent once the grid is fine enough") {
    // at M = 4096 the oracle puts 10% of T at 4.5 sigma, so 99% coverage holds
    const TimeGrid grid(1.0, 4096);
    const int n = 2000;
    const PathBundle b = gen_brownian(grid, n, 1, 555);
    int inside = 0;
    for (int p = 0; p < n; ++p) {
        auto row = b.channel("W.0").row(p);
        double qv = 0.0;
        for (int m = 0; m < grid.steps; ++m) {
            const double d = row[m + 1] - row[m];
            qv += d * d;
        }
        if (std::abs(qv - 1.0) <= 0.1) ++inside;
    }
    CHECK(static_cast<double>(inside) / n >= 0.99);
}

TEST_CASE("independent increments across disjoint windows") {
    const TimeGrid grid(1.0, 128);
    const int n = 20000;
    const PathBundle b = gen_brownian(grid, n, 1, 31);
    const PathSeries& w = b.channel("W.0");
    std::vector<double> first(n), second(n);
    for (int p = 0; p < n; ++p) {
        first[p] = w.at(p, 64) - w.at(p, 0);
        second[p] = w.at(p, 128) - w.at(p, 64);
    }
    const auto fit = stats::ols_slope(first, second);
    CHECK(std::abs(fit.slope) < 3.0 * fit.slope_stderr);
}

TEST_CASE("compensated poisson process") {
    const TimeGrid grid(1.0, 512);
    CHECK_THROWS_AS(gen_compensated_poisson(grid, -1.0, 10, 1), std::invalid_argument);

    SUBCASE("lambda zero means no jumps and zero compensation") {
        const PathBundle b = gen_compensated_poisson(grid, 0.0, 200, 5);
        for (int p = 0; p < 200; ++p) {
            CHECK(b.jump_records()[p].times.empty());
            for (int k = 0; k <= grid.steps; ++k) CHECK(b.channel("Nbar").at(p, k) == 0.0);
        }
    }

    SUBCASE("martingale moments at lambda = 2") {
        const double lambda = 2.0;
        const int n = 20000;
        const PathBundle b = gen_compensated_poisson(grid, lambda, n, 17);
        const std::vector<double> nbar = terminal(b, "Nbar");
        CHECK(std::abs(stats::mean(nbar)) < 3.0 * std::sqrt(lambda / n));
        CHECK(stats::variance(nbar) == doctest::Approx(lambda).epsilon(0.05));

        // count channel consistent with the snapped jump records
        for (int p = 0; p < 50; ++p) {
            const auto& rec = b.jump_records()[p];
            for (std::size_t j = 1; j < rec.times.size(); ++j)
                CHECK(rec.times[j] > rec.times[j - 1]);
            const auto snap = snap_jump_indices(rec.times, grid);
            CHECK(b.channel("N").at(p, grid.steps) == doctest::Approx(snap.size()));
        }
    }

    SUBCASE("martingale regression of increments on the current level") {
        const int n = 20000;
        const PathBundle b = gen_compensated_poisson(grid, 2.0, n, 23);
        const PathSeries& nbar = b.channel("Nbar");
        const int half = grid.steps / 2;
        std::vector<double> level(n), incr(n);
        for (int p = 0; p < n; ++p) {
            level[p] = nbar.at(p, half);
            incr[p] = nbar.at(p, grid.steps) - level[p];
        }
        const auto fit = stats::ols_slope(level, incr);
        CHECK(std::abs(fit.slope) < 3.0 * fit.slope_stderr);
    }
}

TEST_CASE("poisson isometry for a deterministic step integrand") {
    const TimeGrid grid(1.0, 512);
    const double lambda = 2.0;
    const int n = 20000;
    const PathBundle b = gen_compensated_poisson(grid, lambda, n, 71);
    const StepFunction phi({0.0, 0.5, 1.0}, {1.0, 2.0});
    const std::vector<double> pv = phi.grid_values(grid);

    std::vector<double> integral_sq(n);
    for (int p = 0; p < n; ++p) {
        auto row = b.channel("Nbar").row(p);
        double acc = 0.0;
        for (int m = 0; m < grid.steps; ++m) acc += pv[m] * (row[m + 1] - row[m]);
        integral_sq[p] = acc * acc;
    }
    const double predicted = lambda * phi.squared_norm();  // unit marks: E z^2 = 1
    CHECK(std::abs(stats::mean(integral_sq) - predicted) <
          3.0 * stats::stderr_of_mean(integral_sq));
}

TEST_CASE("levy generation") {
    const TimeGrid grid(1.0, 256);

    SUBCASE("pure drift is exact") {
        LevySpec spec;
        spec.drift = 0.3;
        const PathBundle b = gen_levy(spec, grid, 50, 3);
        for (int p = 0; p < 50; ++p)
            for (int k = 0; k <= grid.steps; ++k)
                CHECK(b.channel("total").at(p, k) ==
                      doctest::Approx(0.3 * grid.time(k)).epsilon(1e-12));
    }

    SUBCASE("unit-mark pure jump matches the compensated poisson law") {
        LevySpec spec;
        spec.lambda = 2.0;
        const int n = 20000;
        const PathBundle b = gen_levy(spec, grid, n, 13);
        const std::vector<double> total = terminal(b, "total");
        CHECK(std::abs(stats::mean(total)) < 3.0 * std::sqrt(spec.lambda / n));
        CHECK(stats::variance(total) == doctest::Approx(2.0).epsilon(0.05));
    }

    SUBCASE("gaussian marks hit the variance oracle sigma^2 + lambda E z^2") {
        LevySpec spec;
        spec.sigma = 1.0;
        spec.lambda = 1.0;
        spec.marks = MarkLaw::gaussian(0.0, 1.0);
        const int n = 20000;
        const PathBundle b = gen_levy(spec, grid, n, 29);
        const std::vector<double> total = terminal(b, "total");
        CHECK(stats::variance(total) == doctest::Approx(2.0).epsilon(0.05));
    }

    SUBCASE("big jumps are mirrored uncompensated") {
        LevySpec spec;
        spec.lambda = 3.0;
        spec.marks = MarkLaw::discrete({0.5, 2.0}, {0.5, 0.5});
        const PathBundle b = gen_levy(spec, grid, 200, 37);
        for (int p = 0; p < 200; ++p) {
            const auto& rec = b.jump_records()[p];
            const auto snap = snap_jump_indices(rec.times, grid);
            double big = 0.0;
            for (std::size_t j = 0; j < snap.size(); ++j)
                if (std::abs(rec.marks[j]) > 1.0) big += rec.marks[j];
            CHECK(b.channel("bigjump").at(p, grid.steps) == doctest::Approx(big));
        }
    }

    SUBCASE("invalid mark law is rejected") {
        LevySpec spec;
        spec.lambda = 1.0;
        spec.marks = MarkLaw::discrete({1.0, 2.0}, {0.5, 0.6});
        CHECK_THROWS_AS(gen_levy(spec, grid, 10, 1), std::invalid_argument);
    }
}

TEST_CASE("mark law moments") {
    const MarkLaw pm = MarkLaw::discrete({-1.0, 1.0}, {0.5, 0.5});
    CHECK(pm.moment(1) == 0.0);
    CHECK(pm.moment(2) == 1.0);
    CHECK(pm.moment(3) == 0.0);

    const MarkLaw g = MarkLaw::gaussian(0.0, 2.0);
    CHECK(g.moment(2) == doctest::Approx(4.0));
    CHECK(g.moment(4) == doctest::Approx(3.0 * 16.0));
    CHECK(g.moment(3) == doctest::Approx(0.0));
}

TEST_CASE("jump snapping is strictly increasing and respects the grid") {
    const TimeGrid grid(1.0, 10);
    const std::vector<double> times{0.04, 0.05, 0.06, 0.94, 0.99};
    const auto snap = snap_jump_indices(times, grid);
    REQUIRE(snap.size() >= 4);
    for (std::size_t i = 1; i < snap.size(); ++i) CHECK(snap[i] > snap[i - 1]);
    CHECK(snap.back() <= grid.steps);
    // 0.04 rounds to the nearest slot, but never to a slot at or before the
    // previous jump's
    CHECK(snap[0] >= 0);
    CHECK(snap[1] > snap[0]);
}
