#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mrtkit/chaos.hpp"
#include "mrtkit/io.hpp"
#include "mrtkit/sim_paths.hpp"
#include "mrtkit/stats.hpp"

using namespace mrtkit;

TEST_CASE("hermite values and recurrence") {
    CHECK(hermite(0, 3.7) == 1.0);
    CHECK(hermite(0, -100.0) == 1.0);
    CHECK(hermite(1, 2.0) == 2.0);   // H_1(x) = x
    CHECK(hermite(2, 3.0) == 8.0);   // H_2(x) = x^2 - 1
    CHECK(hermite(3, 2.0) == 2.0);   // H_3(x) = x^3 - 3x
    CHECK_THROWS_AS(hermite(-1, 0.0), std::invalid_argument);

    for (int x = -3; x <= 3; ++x)
        for (int n = 1; n <= 20; ++n) {
            const double lhs = hermite(n + 1, x);
            const double rhs = x * hermite(n, x) - n * hermite(n - 1, x);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
}

TEST_CASE("iterated integral of order one telescopes to the terminal value") {
    const TimeGrid grid(1.0, 128);
    const PathBundle b = gen_brownian(grid, 300, 1, 11);
    const StepFunction one = StepFunction::constant(1.0, 1.0);
    const std::vector<double> j1 = iterated_integral(b, one, 1);
    for (int p = 0; p < 300; ++p)
        CHECK(j1[p] == doctest::Approx(b.channel("W.0").at(p, grid.steps)).epsilon(1e-12));

    CHECK_THROWS_AS(iterated_integral(b, one, 0), std::invalid_argument);
    CHECK_THROWS_AS(iterated_integral(b, one, 4), std::invalid_argument);
}

TEST_CASE("iterated integrals against the ito-formula and hermite oracles") {
    const TimeGrid grid(1.0, 1024);
    const int n = 10000;
    const PathBundle b = gen_brownian(grid, n, 1, 202);
    const StepFunction one = StepFunction::constant(1.0, 1.0);
    const PathSeries& w = b.channel("W.0");

    const std::vector<double> j2 = iterated_integral(b, one, 2);
    const std::vector<double> j3 = iterated_integral(b, one, 3);
    double acc2 = 0.0, acc3 = 0.0;
    for (int p = 0; p < n; ++p) {
        const double wt = w.at(p, grid.steps);
        acc2 += std::abs(j2[p] - 0.5 * (wt * wt - 1.0));
        acc3 += std::abs(j3[p] - hermite(3, wt) / 6.0);
    }
    // order 2: d(W^2) = 2W dW + dt puts the discrete error at O(sqrt(dt))
    CHECK(acc2 / n <= std::sqrt(2.0 * grid.horizon * grid.dt()));
    // order 3: hermite identity oracle n! J_n = H_n(W_1)
    CHECK(acc3 / n <= 0.05);
}

TEST_CASE("discretization error decreases when the grid is refined") {
    const int n = 10000;
    const StepFunction one = StepFunction::constant(1.0, 1.0);
    double prev2 = 1e9, prev3 = 1e9;
    for (int steps : {256, 512, 1024}) {
        const TimeGrid grid(1.0, steps);
        const PathBundle b = gen_brownian(grid, n, 1, 77);
        const PathSeries& w = b.channel("W.0");
        const std::vector<double> j2 = iterated_integral(b, one, 2);
        const std::vector<double> j3 = iterated_integral(b, one, 3);
        double acc2 = 0.0, acc3 = 0.0;
        for (int p = 0; p < n; ++p) {
            const double wt = w.at(p, grid.steps);
            acc2 += std::abs(2.0 * j2[p] - hermite(2, wt));
            acc3 += std::abs(6.0 * j3[p] - hermite(3, wt));
        }
        CHECK(acc2 / n < prev2);
        CHECK(acc3 / n < prev3);
        prev2 = acc2 / n;
        prev3 = acc3 / n;
    }
}

TEST_CASE("chaos norm closed forms") {
    ChaosExpansion constant;
    constant.terms.push_back({0, 5.0, {}});
    CHECK(chaos_norm(constant) == 25.0);

    ChaosExpansion first;
    first.terms.push_back({1, 1.0, StepFunction::constant(1.0, 1.0)});
    CHECK(chaos_norm(first) == doctest::Approx(1.0));

    ChaosExpansion second;
    second.terms.push_back({2, 1.0, StepFunction::constant(1.0, 1.0)});
    CHECK(chaos_norm(second) == doctest::Approx(2.0));

    // same-order cross terms use <g,h>^n
    ChaosExpansion cross;
    cross.terms.push_back({2, 1.0, StepFunction::constant(1.0, 1.0)});
    cross.terms.push_back({2, 2.0, StepFunction::indicator(0.0, 0.5, 1.0)});
    // 2! [1*1*<g,g>^2 + 2*1*2*<g,h>^2 + 4*<h,h>^2] with <g,g>=1, <g,h>=0.5, <h,h>=0.5
    const double expected = 2.0 * (1.0 + 4.0 * 0.25 + 4.0 * 0.25);
    CHECK(chaos_norm(cross) == doctest::Approx(expected));

    ChaosExpansion bad;
    bad.terms.push_back({4, 1.0, StepFunction::constant(1.0, 1.0)});
    CHECK_THROWS_AS(chaos_norm(bad), std::invalid_argument);
}

TEST_CASE("parseval: sample variance matches the chaos norm") {
    const TimeGrid grid(1.0, 512);
    const int n = 20000;
    const PathBundle b = gen_brownian(grid, n, 1, 404);

    ChaosExpansion expansion;
    expansion.terms.push_back({0, 2.0, {}});
    expansion.terms.push_back({1, 1.0, StepFunction::constant(1.0, 1.0)});
    expansion.terms.push_back({2, 0.5, StepFunction::indicator(0.0, 0.5, 1.0)});
    expansion.terms.push_back({3, 0.25, StepFunction::constant(1.0, 1.0)});

    const std::vector<double> values = evaluate(expansion, b);
    const double predicted = chaos_norm(expansion) - 4.0;  // remove the order-0 square
    CHECK(stats::variance(values) == doctest::Approx(predicted).epsilon(0.05));
}

TEST_CASE("chaoses of different order are orthogonal") {
    const TimeGrid grid(1.0, 512);
    const int n = 20000;
    const PathBundle b = gen_brownian(grid, n, 1, 505);
    const StepFunction g = StepFunction::constant(1.0, 1.0);

    const std::vector<double> j1 = iterated_integral(b, g, 1);
    const std::vector<double> j2 = iterated_integral(b, g, 2);
    std::vector<double> prod(n);
    for (int p = 0; p < n; ++p) prod[p] = j1[p] * 2.0 * j2[p];  // I_1 * I_2
    CHECK(std::abs(stats::mean(prod)) < 3.0 * stats::stderr_of_mean(prod));
}

TEST_CASE("doleans exponential") {
    const TimeGrid grid(1.0, 256);
    const int n = 20000;
    const PathBundle b = gen_brownian(grid, n, 1, 606);

    SUBCASE("zero integrand gives the constant path") {
        const PathSeries y = doleans_exp(b, StepFunction::constant(0.0, 1.0));
        for (int p = 0; p < n; p += 997)
            for (int k = 0; k <= grid.steps; ++k) CHECK(y.at(p, k) == 1.0);
    }

    SUBCASE("unit integrand reproduces exp(W_t - t/2)") {
        const PathSeries y = doleans_exp(b, StepFunction::constant(1.0, 1.0));
        for (int p = 0; p < n; p += 997)
            for (int k = 1; k <= grid.steps; ++k) {
                const double w = b.channel("W.0").at(p, k);
                CHECK(y.at(p, k) ==
                      doctest::Approx(std::exp(w - 0.5 * grid.time(k))).epsilon(1e-10));
            }
    }

    SUBCASE("unit mean for a non-trivial integrand") {
        const StepFunction h({0.0, 0.25, 1.0}, {2.0, -0.5});
        const PathSeries y = doleans_exp(b, h);
        std::vector<double> yt(n);
        for (int p = 0; p < n; ++p) yt[p] = y.at(p, grid.steps) - 1.0;
        CHECK(std::abs(stats::mean(yt)) < 3.0 * stats::stderr_of_mean(yt));
    }
}

TEST_CASE("kernel projection clips the kernel to the window") {
    const TimeGrid grid(1.0, 128);
    ChaosTerm term{2, 1.0, StepFunction::constant(1.0, 1.0)};

    SUBCASE("full window leaves the term alone") {
        const ChaosTerm out = project_kernel(term, grid, 1.0);
        CHECK(out.kernel.squared_norm() == doctest::Approx(1.0));
    }

    SUBCASE("empty window zeroes the kernel") {
        const ChaosTerm out = project_kernel(term, grid, 0.0);
        CHECK(out.kernel.squared_norm() == 0.0);
        const PathBundle b = gen_brownian(grid, 10, 1, 1);
        const std::vector<double> j = iterated_integral(b, out.kernel, 2);
        for (double v : j) CHECK(v == 0.0);
    }

    SUBCASE("off-grid window is rejected") {
        CHECK_THROWS_AS(project_kernel(term, grid, 0.1234), std::invalid_argument);
    }

    SUBCASE("projection acts as the conditional expectation") {
        const int n = 20000;
        const PathBundle b = gen_brownian(grid, n, 1, 707);
        const ChaosTerm half = project_kernel(term, grid, 0.5);
        const std::vector<double> full = iterated_integral(b, term.kernel, 2);
        const std::vector<double> proj = iterated_integral(b, half.kernel, 2);

        // the projected value must be the regression target of the full one
        const auto fit = stats::ols_slope(proj, full);
        CHECK(std::abs(fit.slope - 1.0) < 3.0 * fit.slope_stderr);

        // and it must match the explicit window formula (W_{1/2}^2 - 1/2)/2
        for (int p = 0; p < n; p += 1999) {
            const double wh = b.channel("W.0").at(p, 64);
            CHECK(proj[p] == doctest::Approx(0.5 * (wh * wh - 0.5)).epsilon(0.2));
        }
    }
}

TEST_CASE("chaos expansion json round trip") {
    ChaosExpansion expansion;
    expansion.terms.push_back({0, 1.5, {}});
    expansion.terms.push_back({2, -0.5, StepFunction({0.0, 0.25, 1.0}, {1.0, 3.0})});

    const auto j = chaos_to_json(expansion);
    const ChaosExpansion back = chaos_from_json(nlohmann::json::parse(j.dump()));
    REQUIRE(back.terms.size() == 2);
    CHECK(back.terms[0].order == 0);
    CHECK(back.terms[0].coeff == 1.5);
    CHECK(back.terms[1].order == 2);
    CHECK(back.terms[1].kernel.vals() == std::vector<double>{1.0, 3.0});
    CHECK(back.terms[1].kernel.breaks() == std::vector<double>{0.0, 0.25, 1.0});
}

TEST_CASE("step function evaluation conventions") {
    const StepFunction g({0.0, 0.5, 1.0}, {2.0, -1.0});
    CHECK(g.value(0.0) == 2.0);
    CHECK(g.value(0.3) == 2.0);
    CHECK(g.value(0.5) == 2.0);   // left-continuous at the break
    CHECK(g.value(0.7) == -1.0);
    CHECK(g.value(1.0) == -1.0);
    CHECK(g.squared_norm() == doctest::Approx(0.5 * 4.0 + 0.5 * 1.0));

    const TimeGrid grid(1.0, 4);
    const auto vals = g.grid_values(grid);
    CHECK(vals == std::vector<double>{2.0, 2.0, -1.0, -1.0});

    const StepFunction clipped = g.restricted(0.5);
    CHECK(clipped.value(0.3) == 2.0);
    CHECK(clipped.value(0.7) == 0.0);
    CHECK(clipped.squared_norm() == doctest::Approx(2.0));

    CHECK_THROWS_AS(StepFunction({0.5, 1.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(StepFunction({0.0, 0.0}, {1.0}), std::invalid_argument);
}
