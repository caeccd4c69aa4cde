#include "mrtkit/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "mrtkit/chaos.hpp"
#include "mrtkit/clark_ocone.hpp"
#include "mrtkit/functionals.hpp"
#include "mrtkit/girsanov.hpp"
#include "mrtkit/io.hpp"
#include "mrtkit/malliavin.hpp"
#include "mrtkit/sim_paths.hpp"
#include "mrtkit/stats.hpp"
#include "mrtkit/teugels.hpp"

namespace mrtkit {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const std::vector<std::pair<std::string, ExperimentKind>>& kind_table() {
    static const std::vector<std::pair<std::string, ExperimentKind>> table = {
        {"simulate", ExperimentKind::Simulate},   {"chaos", ExperimentKind::Chaos},
        {"clark-ocone", ExperimentKind::ClarkOcone}, {"jump-co", ExperimentKind::JumpCo},
        {"levy-co", ExperimentKind::LevyCo},      {"girsanov", ExperimentKind::Girsanov},
        {"teugels", ExperimentKind::Teugels},     {"compensator", ExperimentKind::Compensator},
        {"hedge", ExperimentKind::Hedge}};
    return table;
}

double weighted_stderr(std::span<const double> x, std::span<const double> w) {
    const double m = stats::weighted_mean(x, w);
    double sw = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        acc += w[i] * w[i] * (x[i] - m) * (x[i] - m);
    }
    return std::sqrt(acc) / sw;
}

StepFunction step_from_json(const json& j, double horizon) {
    if (j.is_number()) return StepFunction::constant(j.get<double>(), horizon);
    if (j.contains("const")) return StepFunction::constant(j.at("const").get<double>(), horizon);
    return StepFunction(j.at("breaks").get<std::vector<double>>(),
                        j.at("vals").get<std::vector<double>>());
}

double time_from_json(const json& j, const TimeGrid& grid) {
    if (j.is_string() && j.get<std::string>() == "T") return grid.horizon;
    return j.get<double>();
}

// catalog functional factory used by the regression-route experiments
FunctionalPtr functional_from_json(const json& j, const TimeGrid& grid) {
    const std::string fn = j.at("fn").get<std::string>();
    const std::string channel = j.value("channel", std::string("W.0"));
    if (fn == "power") {
        return make_power(channel, time_from_json(j.at("time"), grid),
                          j.at("exponent").get<int>(), j.value("coeff", 1.0));
    }
    if (fn == "product_times") {
        std::vector<double> times;
        for (const auto& t : j.at("times")) times.push_back(time_from_json(t, grid));
        return make_product_times(channel, std::move(times));
    }
    if (fn == "exp_affine") {
        std::vector<double> times;
        for (const auto& t : j.at("times")) times.push_back(time_from_json(t, grid));
        return make_exp_affine(channel, std::move(times),
                               j.at("weights").get<std::vector<double>>(),
                               j.value("shift", 0.0));
    }
    if (fn == "smoothed_call") {
        return make_smoothed_call(channel, time_from_json(j.at("time"), grid),
                                  j.at("strike").get<double>(), j.at("eps").get<double>());
    }
    if (fn == "sum") {
        std::vector<FunctionalPtr> parts;
        std::vector<double> coeffs;
        for (const auto& part : j.at("parts")) {
            parts.push_back(functional_from_json(part, grid));
            coeffs.push_back(part.value("coeff_in_sum", 1.0));
        }
        return make_sum(std::move(parts), std::move(coeffs));
    }
    if (fn == "product") {
        const auto& parts = j.at("parts");
        if (parts.size() != 2)
            throw std::invalid_argument("functional: 'product' takes exactly two parts");
        return make_product(functional_from_json(parts[0], grid),
                            functional_from_json(parts[1], grid));
    }
    throw std::invalid_argument("functional: unknown fn '" + fn + "'");
}

LevySpec levy_from_json(const json& j) {
    LevySpec spec;
    spec.drift = j.value("drift", 0.0);
    spec.sigma = j.value("sigma", 0.0);
    spec.lambda = j.value("lambda", 0.0);
    if (j.contains("marks")) {
        const auto& marks = j.at("marks");
        const std::string kind = marks.value("kind", std::string("discrete"));
        if (kind == "gaussian")
            spec.marks = MarkLaw::gaussian(marks.value("mean", 0.0), marks.value("sd", 1.0));
        else
            spec.marks = MarkLaw::discrete(marks.at("values").get<std::vector<double>>(),
                                           marks.at("probs").get<std::vector<double>>());
    }
    return spec;
}

ThetaSpec theta_from_json(const json& j, double horizon) {
    const std::string kind = j.value("kind", std::string("constant"));
    if (kind == "constant") return ThetaSpec::make_constant(j.value("value", 0.0));
    if (kind == "deterministic")
        return ThetaSpec::make_deterministic(step_from_json(j.at("profile"), horizon));
    if (kind == "frozen") {
        const std::string fn = j.value("fn", std::string("tanh"));
        return ThetaSpec::make_frozen(
            j.at("t0").get<double>(),
            fn == "sin" ? ThetaSpec::FrozenFn::Sin : ThetaSpec::FrozenFn::Tanh,
            j.value("amplitude", 1.0), j.value("scale", 1.0));
    }
    throw std::invalid_argument("theta: unknown kind '" + kind + "'");
}

void add_check(RunReport& report, std::string name, double statistic, double tolerance) {
    report.checks.push_back(
        {std::move(name), statistic, tolerance, statistic <= tolerance});
}

// per-path stochastic-integral part of a reconstruction
std::vector<double> integral_samples(const IntegrandEstimate& est, const PathBundle& paths,
                                     const std::string& w_channel = "W.0") {
    std::vector<double> out(paths.n_paths(), 0.0);
    for (const auto& [block, values] : est.blocks) {
        const std::string& channel = block == "W" ? w_channel : jump_channel_of(paths);
        const PathSeries& drv = paths.channel(channel);
        for (int p = 0; p < paths.n_paths(); ++p) {
            auto row = drv.row(p);
            double acc = 0.0;
            for (int m = 0; m < est.grid.steps; ++m)
                acc += values.at(p, m) * (row[m + 1] - row[m]);
            out[p] += acc;
        }
    }
    return out;
}

double max_initial_abs(const PathBundle& bundle, const std::string& channel) {
    double mx = 0.0;
    const PathSeries& s = bundle.channel(channel);
    for (int p = 0; p < bundle.n_paths(); ++p) mx = std::max(mx, std::abs(s.at(p, 0)));
    return mx;
}

std::vector<double> terminal_values(const PathBundle& bundle, const std::string& channel) {
    std::vector<double> out(bundle.n_paths());
    const PathSeries& s = bundle.channel(channel);
    for (int p = 0; p < bundle.n_paths(); ++p) out[p] = s.at(p, bundle.grid().steps);
    return out;
}

void export_bundle_artifacts(const PathBundle& bundle, const ExperimentConfig& cfg,
                             RunReport& report) {
    const auto csv = cfg.out_dir / "channels.csv";
    const auto manifest = cfg.out_dir / "manifest.json";
    export_channels_csv(bundle, csv, cfg.max_csv_paths);
    export_manifest(bundle, manifest);
    report.artifacts.push_back(csv.string());
    report.artifacts.push_back(manifest.string());
}

void run_simulate(const ExperimentConfig& cfg, RunReport& report) {
    const std::string process = cfg.params.value("process", std::string("brownian"));
    const GenOptions opt{cfg.threads, 0};

    if (process == "brownian") {
        const int dims = cfg.params.value("dims", 1);
        const PathBundle bundle = gen_brownian(cfg.grid, cfg.n_paths, dims, cfg.seed, opt);
        add_check(report, "initial_value_zero", max_initial_abs(bundle, "W.0"), 0.0);

        const std::vector<double> wt = terminal_values(bundle, "W.0");
        add_check(report, "terminal_mean_within_3se", std::abs(stats::mean(wt)),
                  3.0 * stats::stderr_of_mean(wt));

        // quadratic variation concentration: 99% band implied by
        // Var(sum dW^2) = 2 T dt
        const PathSeries& w = bundle.channel("W.0");
        const double band = 2.6 * std::sqrt(2.0 * cfg.grid.horizon * cfg.grid.dt());
        int outside = 0;
        for (int p = 0; p < cfg.n_paths; ++p) {
            auto row = w.row(p);
            double qv = 0.0;
            for (int m = 0; m < cfg.grid.steps; ++m) {
                const double d = row[m + 1] - row[m];
                qv += d * d;
            }
            if (std::abs(qv - cfg.grid.horizon) > band) ++outside;
        }
        add_check(report, "quadratic_variation_band_fraction",
                  static_cast<double>(outside) / cfg.n_paths, 0.015);
        export_bundle_artifacts(bundle, cfg, report);
    } else if (process == "poisson") {
        const double lambda = cfg.params.value("lambda", 2.0);
        const PathBundle bundle =
            gen_compensated_poisson(cfg.grid, lambda, cfg.n_paths, cfg.seed, opt);
        add_check(report, "initial_value_zero", max_initial_abs(bundle, "Nbar"), 0.0);
        const std::vector<double> nbar = terminal_values(bundle, "Nbar");
        if (lambda == 0.0) {
            double mx = 0.0;
            for (double v : nbar) mx = std::max(mx, std::abs(v));
            add_check(report, "compensated_identically_zero", mx, 0.0);
        } else {
            add_check(report, "terminal_mean_within_3se", std::abs(stats::mean(nbar)),
                      3.0 * stats::stderr_of_mean(nbar));
            add_check(report, "terminal_variance_rel_dev",
                      std::abs(stats::variance(nbar) / (lambda * cfg.grid.horizon) - 1.0),
                      0.05);
        }
        export_bundle_artifacts(bundle, cfg, report);
    } else if (process == "levy") {
        const LevySpec spec = levy_from_json(cfg.params.value("levy", json::object()));
        const PathBundle bundle = gen_levy(spec, cfg.grid, cfg.n_paths, cfg.seed, opt);
        add_check(report, "initial_value_zero", max_initial_abs(bundle, "total"), 0.0);
        const std::vector<double> total = terminal_values(bundle, "total");
        const double mean_target = spec.drift * cfg.grid.horizon;
        std::vector<double> centered(total);
        for (double& v : centered) v -= mean_target;
        add_check(report, "terminal_mean_within_3se", std::abs(stats::mean(centered)),
                  3.0 * stats::stderr_of_mean(centered));
        const double var_target =
            (spec.sigma * spec.sigma + spec.lambda * spec.marks.moment(2)) *
            cfg.grid.horizon;
        if (var_target > 0.0)
            add_check(report, "terminal_variance_rel_dev",
                      std::abs(stats::variance(total) / var_target - 1.0), 0.05);
        export_bundle_artifacts(bundle, cfg, report);
    } else {
        throw std::invalid_argument("simulate: unknown process '" + process + "'");
    }
}

void run_chaos(const ExperimentConfig& cfg, RunReport& report) {
    const GenOptions opt{cfg.threads, 0};
    const PathBundle bundle = gen_brownian(cfg.grid, cfg.n_paths, 1, cfg.seed, opt);
    const double T = cfg.grid.horizon;

    // identity between the iterated integrals and the Hermite polynomials
    const StepFunction one = StepFunction::constant(1.0, T);
    const std::vector<double> wt = terminal_values(bundle, "W.0");
    const double norm = std::sqrt(T);
    double factorial = 1.0;
    for (int n = 1; n <= 3; ++n) {
        factorial *= n;
        const std::vector<double> j = iterated_integral(bundle, one, n);
        double acc = 0.0;
        for (int p = 0; p < cfg.n_paths; ++p) {
            const double oracle =
                std::pow(norm, n) * hermite(n, wt[p] / norm) / factorial;
            acc += std::abs(j[p] - oracle);
        }
        add_check(report, "hermite_identity_n" + std::to_string(n), acc / cfg.n_paths,
                  0.05);
    }

    ChaosExpansion expansion;
    if (cfg.params.contains("expansion")) {
        expansion = chaos_from_json(cfg.params.at("expansion"));
    } else {
        expansion.terms.push_back({0, 1.0, {}});
        expansion.terms.push_back({1, 1.0, StepFunction::constant(1.0, T)});
        expansion.terms.push_back({2, 0.5, StepFunction::indicator(0.0, T / 2, T)});
        expansion.terms.push_back({3, 0.25, StepFunction::constant(1.0, T)});
    }

    const std::vector<double> values = evaluate(expansion, bundle);
    double order0 = 0.0;
    for (const auto& term : expansion.terms)
        if (term.order == 0) order0 += term.coeff;
    const double predicted = chaos_norm(expansion) - order0 * order0;
    if (predicted > 0.0)
        add_check(report, "parseval_variance_rel_dev",
                  std::abs(stats::variance(values) / predicted - 1.0), 0.05);

    const auto expansion_file = cfg.out_dir / "expansion.json";
    std::ofstream out(expansion_file);
    out << chaos_to_json(expansion).dump(2) << "\n";
    report.artifacts.push_back(expansion_file.string());
}

void run_clark_ocone(const ExperimentConfig& cfg, RunReport& report) {
    const GenOptions opt{cfg.threads, 0};
    const PathBundle bundle = gen_brownian(cfg.grid, cfg.n_paths, 1, cfg.seed, opt);
    const std::string id = cfg.params.value("functional", std::string("W_T"));
    const std::string method = cfg.params.value("method", std::string("closed"));

    IntegrandEstimate est;
    std::vector<double> samples;
    double tol = 0.05;
    if (method == "closed") {
        StepFunction h = StepFunction::constant(1.0, cfg.grid.horizon);
        if (cfg.params.contains("h")) h = step_from_json(cfg.params.at("h"), cfg.grid.horizon);
        est = co_integrand_closed(id, bundle, &h);
        samples = co_catalog_samples(id, bundle, &h);
        if (id == "W_T") tol = 1e-10;
    } else {
        const int degree = cfg.params.value("degree", 4);
        FunctionalPtr F;
        if (cfg.params.contains("functional_spec")) {
            F = functional_from_json(cfg.params.at("functional_spec"), cfg.grid);
            tol = 0.10;
        } else if (id == "W_T") {
            F = make_power("W.0", cfg.grid.horizon, 1);
        } else if (id == "W_T2") {
            F = make_power("W.0", cfg.grid.horizon, 2);
        } else if (id == "smoothed_call") {
            const double strike = cfg.params.value("strike", 0.0);
            F = make_smoothed_call("W.0", cfg.grid.horizon, strike,
                                   cfg.params.value("eps", 0.01 * std::max(strike, 1.0)));
            tol = 0.10;
        } else {
            throw std::invalid_argument("clark-ocone: no regression functional for id '" +
                                        id + "'");
        }
        est = co_integrand_regress(*F, bundle, degree);
        samples.resize(cfg.n_paths);
        for (int p = 0; p < cfg.n_paths; ++p) samples[p] = F->eval(PathView(bundle, p));
    }

    const ReconstructionReport rec = co_reconstruct(samples, est, bundle);
    add_check(report, "reconstruction_rel_l2", rec.rel_l2_error, tol);

    const std::vector<double> incr = integral_samples(est, bundle);
    add_check(report, "zero_mean_increments", std::abs(stats::mean(incr)),
              3.0 * stats::stderr_of_mean(incr));

    const auto integrand_file = cfg.out_dir / "integrand.csv";
    export_integrand_csv(est, integrand_file, cfg.max_csv_paths);
    report.artifacts.push_back(integrand_file.string());
}

void run_jump_co(const ExperimentConfig& cfg, RunReport& report) {
    const GenOptions opt{cfg.threads, 0};
    const double lambda = cfg.params.value("lambda", 2.0);
    const PathBundle bundle =
        gen_compensated_poisson(cfg.grid, lambda, cfg.n_paths, cfg.seed, opt);
    const std::string id = cfg.params.value("functional", std::string("Ntilde_T"));

    const IntegrandEstimate est = co_integrand_closed(id, bundle);
    const std::vector<double> samples = co_catalog_samples(id, bundle);
    const ReconstructionReport rec = co_reconstruct(samples, est, bundle);
    add_check(report, "reconstruction_rel_l2", rec.rel_l2_error,
              id == "Ntilde_T" ? 1e-10 : 0.05);

    const auto integrand_file = cfg.out_dir / "integrand.csv";
    export_integrand_csv(est, integrand_file, cfg.max_csv_paths);
    report.artifacts.push_back(integrand_file.string());
}

void run_levy_co(const ExperimentConfig& cfg, RunReport& report) {
    const GenOptions opt{cfg.threads, 0};
    LevySpec spec;
    spec.sigma = cfg.params.value("sigma", 1.0);
    spec.lambda = cfg.params.value("lambda", 2.0);
    const PathBundle bundle = gen_levy(spec, cfg.grid, cfg.n_paths, cfg.seed, opt);
    const std::string id = cfg.params.value("functional", std::string("W_T+Ntilde_T"));

    const IntegrandEstimate est = co_levy(id, bundle);
    const std::vector<double> samples = co_levy_samples(id, bundle);
    const ReconstructionReport rec = co_reconstruct(samples, est, bundle);
    add_check(report, "reconstruction_rel_l2", rec.rel_l2_error, 0.08);

    const auto integrand_file = cfg.out_dir / "integrand.csv";
    export_integrand_csv(est, integrand_file, cfg.max_csv_paths);
    report.artifacts.push_back(integrand_file.string());
}

void run_girsanov(const ExperimentConfig& cfg, RunReport& report) {
    const GenOptions opt{cfg.threads, 0};
    const PathBundle base = gen_brownian(cfg.grid, cfg.n_paths, 1, cfg.seed, opt);
    const ThetaSpec theta =
        theta_from_json(cfg.params.value("theta", json{{"kind", "constant"}, {"value", 0.5}}),
                        cfg.grid.horizon);
    const MeasureChange mc = density_path(theta, base);
    const PathBundle bundle = drifted_bm(base, theta);
    const int last = cfg.grid.steps;

    std::vector<double> z_t(cfg.n_paths);
    for (int p = 0; p < cfg.n_paths; ++p) z_t[p] = mc.Z.at(p, last);
    std::vector<double> centered(z_t);
    for (double& v : centered) v -= 1.0;
    add_check(report, "mean_Z_T within 3se of 1", std::abs(stats::mean(centered)),
              3.0 * stats::stderr_of_mean(centered));

    const std::vector<double> wt = terminal_values(bundle, "Wtilde");
    add_check(report, "weighted_Wtilde_mean_within_3se",
              std::abs(stats::weighted_mean(wt, z_t)), 3.0 * weighted_stderr(wt, z_t));
    add_check(report, "weighted_Wtilde_variance_rel_dev",
              std::abs(stats::weighted_variance(wt, z_t) / cfg.grid.horizon - 1.0), 0.05);

    const int degree = cfg.params.value("degree", 5);
    FunctionalPtr F = cfg.params.contains("functional_spec")
                          ? functional_from_json(cfg.params.at("functional_spec"), cfg.grid)
                          : make_power("W.0", cfg.grid.horizon, 1);
    const IntegrandEstimate est = gco_integrand(*F, mc, bundle, degree);
    std::vector<double> samples(cfg.n_paths);
    for (int p = 0; p < cfg.n_paths; ++p) samples[p] = F->eval(PathView(bundle, p));
    const WeightedReconstructionReport rec = gco_reconstruct(samples, est, mc, bundle);
    add_check(report, "gco_reconstruction_weighted_rel_l2", rec.rel_l2_error,
              theta.is_deterministic() ? 0.05 : 0.10);

    if (theta.kind == ThetaSpec::Kind::Constant && theta.constant == 0.0) {
        const IntegrandEstimate plain = co_integrand_regress(*F, base, degree);
        double mx = 0.0;
        const PathSeries& a = est.blocks.at("W");
        const PathSeries& b = plain.blocks.at("W");
        for (int p = 0; p < cfg.n_paths; ++p)
            for (int m = 0; m < cfg.grid.steps; ++m)
                mx = std::max(mx, std::abs(a.at(p, m) - b.at(p, m)));
        add_check(report, "theta_zero_reduction_bitwise", mx, 0.0);
    }

    report.extra["measure"] = rec.measure;
    const auto weights_file = cfg.out_dir / "weights.csv";
    export_weights_csv(z_t, weights_file);
    report.artifacts.push_back(weights_file.string());
    const auto integrand_file = cfg.out_dir / "integrand.csv";
    export_integrand_csv(est, integrand_file, cfg.max_csv_paths);
    report.artifacts.push_back(integrand_file.string());
}

// modified Gram-Schmidt with one reorthogonalization pass, used as an
// independent cross-check of the primary routine
Eigen::MatrixXd brute_force_orthogonalize(const Eigen::MatrixXd& gram,
                                          const std::vector<bool>& degenerate) {
    const int n = static_cast<int>(gram.rows());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(n, i);
        for (int pass = 0; pass < 2; ++pass)
            for (int k = 0; k < i; ++k) {
                if (degenerate[k]) continue;
                const Eigen::VectorXd hk = a.row(k).transpose();
                const double den = hk.dot(gram * hk);
                if (den <= 0.0) continue;
                v -= (v.dot(gram * hk) / den) * hk;
            }
        v(i) = 1.0;
        a.row(i) = v.transpose();
    }
    return a;
}

void run_teugels(const ExperimentConfig& cfg, RunReport& report) {
    const GenOptions opt{cfg.threads, 0};
    LevySpec spec;
    if (cfg.params.contains("levy")) {
        spec = levy_from_json(cfg.params.at("levy"));
    } else {
        spec.lambda = 2.0;
        spec.marks = MarkLaw::discrete({-1.0, 1.0}, {0.5, 0.5});
    }
    const int imax = cfg.params.value("imax", 2);
    const PathBundle bundle = gen_levy(spec, cfg.grid, cfg.n_paths, cfg.seed, opt);
    const PowerJumpFamily family = power_jump_paths(spec, bundle, imax);
    const Eigen::MatrixXd gram = gram_matrix(spec, imax);
    const OrthoCoeffs coeffs = orthogonalize(gram);

    const Eigen::MatrixXd folded = coeffs.a * gram * coeffs.a.transpose();
    double offdiag = 0.0;
    for (int i = 0; i < imax; ++i)
        for (int j = 0; j < imax; ++j)
            if (i != j && !coeffs.degenerate[i] && !coeffs.degenerate[j])
                offdiag = std::max(offdiag, std::abs(folded(i, j)));
    add_check(report, "orthogonalized_gram_offdiagonal", offdiag, 1e-10);

    const Eigen::MatrixXd brute = brute_force_orthogonalize(gram, coeffs.degenerate);
    double brute_dev = 0.0;
    for (int i = 0; i < imax; ++i) {
        if (coeffs.degenerate[i]) continue;
        for (int j = 0; j < imax; ++j)
            brute_dev = std::max(brute_dev, std::abs(coeffs.a(i, j) - brute(i, j)));
    }
    add_check(report, "brute_force_agreement", brute_dev, 1e-8);

    const std::vector<PathSeries> H = ortho_family_paths(coeffs, family);
    std::vector<int> live;
    for (int i = 0; i < imax; ++i)
        if (!coeffs.degenerate[i]) live.push_back(i);
    if (live.size() >= 2) {
        std::vector<double> prod(cfg.n_paths);
        for (int p = 0; p < cfg.n_paths; ++p)
            prod[p] = H[live[0]].at(p, cfg.grid.steps) * H[live[1]].at(p, cfg.grid.steps);
        add_check(report, "ortho_product_mean_within_3se", std::abs(stats::mean(prod)),
                  3.0 * stats::stderr_of_mean(prod));
    }

    std::vector<double> y1(cfg.n_paths);
    for (int p = 0; p < cfg.n_paths; ++p) y1[p] = family.Y[0].at(p, cfg.grid.steps);
    const PrpResidualReport prp =
        prp_residual(y1, H, coeffs.degenerate, bundle, cfg.params.value("degree", 1));
    add_check(report, "prp_residual_Y1", prp.rel_residual, 1e-8);

    std::vector<std::vector<double>> rows(imax, std::vector<double>(imax));
    for (int i = 0; i < imax; ++i)
        for (int j = 0; j < imax; ++j) rows[i][j] = coeffs.a(i, j);
    const auto coeff_file = cfg.out_dir / "ortho_coeffs.csv";
    export_matrix_csv(rows, coeff_file);
    report.artifacts.push_back(coeff_file.string());
}

void run_compensator(const ExperimentConfig& cfg, RunReport& report) {
    const GenOptions opt{cfg.threads, 0};
    MarkedProcessSpec spec;
    if (cfg.params.contains("marked")) {
        const auto& j = cfg.params.at("marked");
        spec.mark_values = j.at("mark_values").get<std::vector<double>>();
        for (const auto& s : j.at("stages")) {
            MarkedStage stage;
            stage.rate = s.at("rate").get<double>();
            stage.mark_probs = s.at("probs").get<std::vector<double>>();
            spec.stages.push_back(std::move(stage));
        }
    } else {
        spec.mark_values = {1.0, 2.0};
        spec.stages = {{2.0, {0.3, 0.7}}, {3.0, {0.3, 0.7}}};
    }
    const std::vector<int> subset =
        cfg.params.value("subset", std::vector<int>{0});
    const std::vector<double> times =
        cfg.params.value("times", std::vector<double>{0.25, 0.5, 1.0});

    const PathBundle bundle = gen_marked(spec, cfg.grid, cfg.n_paths, cfg.seed, opt);
    const CompensatorPaths cp = compensator_marked(spec, subset, bundle);

    for (double t : times) {
        const int k = cfg.grid.index_of(t);
        if (k < 0) throw std::invalid_argument("compensator: check time off the grid");
        std::vector<double> q(cfg.n_paths);
        for (int p = 0; p < cfg.n_paths; ++p) q[p] = cp.q.at(p, k);
        add_check(report, "q_mean_within_3se_t" + std::to_string(t),
                  std::abs(stats::mean(q)), 3.0 * stats::stderr_of_mean(q));
    }

    PathBundle artifact(cfg.grid, cfg.n_paths, cfg.seed);
    artifact.add_channel("p") = cp.counts;
    artifact.add_channel("ptilde") = cp.compensator;
    artifact.add_channel("q") = cp.q;
    export_bundle_artifacts(artifact, cfg, report);
}

void run_hedge(const ExperimentConfig& cfg, RunReport& report) {
    const double strike = cfg.params.value("strike", 100.0);
    const double rate = cfg.params.value("rate", 0.05);
    const double sigma = cfg.params.value("sigma", 0.2);
    const double s0 = cfg.params.value("s0", 100.0);
    const int degree = cfg.params.value("degree", 5);

    const HedgeReport hedge =
        replicate_bs(strike, rate, sigma, s0, cfg.grid, cfg.n_paths, cfg.seed, degree);
    add_check(report, "delta_deviation_mean_abs", hedge.mean_abs_delta_dev, 0.05);
    add_check(report, "terminal_replication_rel_l2", hedge.terminal_rel_error,
              strike == 0.0 ? 1e-10 : 0.05);
    report.extra["c0"] = hedge.c0;

    std::vector<std::vector<double>> rows;
    for (int m = 0; m < hedge.steps; ++m)
        rows.push_back({cfg.grid.time(m), hedge.delta_dev_by_step[m]});
    const auto dev_file = cfg.out_dir / "delta_deviation.csv";
    export_matrix_csv(rows, dev_file);
    report.artifacts.push_back(dev_file.string());
}

}  // namespace

const std::vector<std::string>& experiment_kind_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, kind] : kind_table()) out.push_back(name);
        return out;
    }();
    return names;
}

std::optional<ExperimentKind> kind_from_name(const std::string& name) {
    for (const auto& [n, kind] : kind_table())
        if (n == name) return kind;
    return std::nullopt;
}

const std::string& kind_name(ExperimentKind kind) {
    for (const auto& [name, k] : kind_table())
        if (k == kind) return name;
    throw std::logic_error("kind_name: unknown kind");
}

ConfigParseResult parse_config(const std::string& text,
                               std::optional<ExperimentKind> kind_override) {
    ConfigParseResult result;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        result.errors.push_back(std::string("config: malformed JSON: ") + e.what());
        return result;
    }
    if (!doc.is_object()) {
        result.errors.push_back("config: document must be a JSON object");
        return result;
    }

    ExperimentConfig cfg;
    auto fail = [&](const std::string& msg) { result.errors.push_back(msg); };

    std::optional<ExperimentKind> kind = kind_override;
    if (doc.contains("kind")) {
        const auto name = doc["kind"].is_string() ? doc["kind"].get<std::string>() : "";
        const auto parsed = kind_from_name(name);
        if (!parsed) {
            std::string valid;
            for (const auto& n : experiment_kind_names()) valid += n + " ";
            fail("config.kind: unknown experiment kind '" + name + "'; valid kinds: " + valid);
        } else if (kind && *kind != *parsed) {
            fail("config.kind: '" + name + "' conflicts with the requested subcommand");
        } else {
            kind = parsed;
        }
    }
    if (!kind) {
        std::string valid;
        for (const auto& n : experiment_kind_names()) valid += n + " ";
        fail("config.kind: missing; valid kinds: " + valid);
    } else {
        cfg.kind = *kind;
    }

    double horizon = 1.0;
    int steps = 512;
    if (doc.contains("grid")) {
        const auto& grid = doc["grid"];
        if (grid.contains("T")) {
            if (grid["T"].is_number())
                horizon = grid["T"].get<double>();
            else
                fail("config.grid.T: must be a number");
        }
        if (grid.contains("M")) {
            if (grid["M"].is_number_integer())
                steps = grid["M"].get<int>();
            else
                fail("config.grid.M: must be an integer");
        }
    }
    if (!(horizon > 0.0)) fail("config.grid.T: must be positive");
    if (steps < 1) fail("config.grid.M: must be >= 1");

    if (doc.contains("n_paths")) {
        if (doc["n_paths"].is_number_integer())
            cfg.n_paths = doc["n_paths"].get<int>();
        else
            fail("config.n_paths: must be an integer");
    }
    if (cfg.n_paths < 1) fail("config.n_paths: must be >= 1");

    if (doc.contains("seed")) {
        if (doc["seed"].is_number_unsigned() || doc["seed"].is_number_integer())
            cfg.seed = doc["seed"].get<std::uint64_t>();
        else
            fail("config.seed: must be an integer");
    }
    if (doc.contains("threads")) {
        if (doc["threads"].is_number_integer())
            cfg.threads = doc["threads"].get<int>();
        else
            fail("config.threads: must be an integer");
    }
    if (cfg.threads < 1) fail("config.threads: must be >= 1");

    if (doc.contains("max_csv_paths")) {
        if (doc["max_csv_paths"].is_number_integer())
            cfg.max_csv_paths = doc["max_csv_paths"].get<int>();
        else
            fail("config.max_csv_paths: must be an integer");
    }
    if (cfg.max_csv_paths < 0) fail("config.max_csv_paths: must be >= 0");

    if (doc.contains("out_dir")) {
        if (doc["out_dir"].is_string())
            cfg.out_dir = doc["out_dir"].get<std::string>();
        else
            fail("config.out_dir: must be a string");
    }
    if (doc.contains("params")) {
        if (doc["params"].is_object())
            cfg.params = doc["params"];
        else
            fail("config.params: must be an object");
    }

    // kind-specific precondition checks, collected rather than thrown
    if (kind) {
        const auto& p = cfg.params;
        try {
            switch (*kind) {
                case ExperimentKind::Simulate: {
                    if (p.value("dims", 1) < 1) fail("params.dims: must be >= 1");
                    if (p.value("lambda", 0.0) < 0.0) fail("params.lambda: must be >= 0");
                    if (p.contains("levy")) levy_from_json(p.at("levy")).validate();
                    break;
                }
                case ExperimentKind::Chaos: {
                    if (p.contains("expansion")) chaos_from_json(p.at("expansion"));
                    break;
                }
                case ExperimentKind::ClarkOcone: {
                    const int degree = p.value("degree", 4);
                    if (degree < 1 || degree > 6) fail("params.degree: must lie in [1,6]");
                    if (p.value("method", std::string("closed")) == "regress" &&
                        cfg.n_paths < 50 * (degree + 1))
                        fail("config.n_paths: regression needs at least 50*(degree+1) paths");
                    break;
                }
                case ExperimentKind::JumpCo: {
                    if (p.value("lambda", 2.0) < 0.0) fail("params.lambda: must be >= 0");
                    break;
                }
                case ExperimentKind::LevyCo: {
                    if (p.value("lambda", 2.0) < 0.0) fail("params.lambda: must be >= 0");
                    if (p.value("sigma", 1.0) < 0.0) fail("params.sigma: must be >= 0");
                    break;
                }
                case ExperimentKind::Girsanov: {
                    if (p.contains("theta")) theta_from_json(p.at("theta"), horizon);
                    const int degree = p.value("degree", 5);
                    if (degree < 1 || degree > 6) fail("params.degree: must lie in [1,6]");
                    break;
                }
                case ExperimentKind::Teugels: {
                    const int imax = p.value("imax", 2);
                    if (imax < 1 || imax > 6) fail("params.imax: must lie in [1,6]");
                    if (p.contains("levy")) levy_from_json(p.at("levy")).validate();
                    break;
                }
                case ExperimentKind::Compensator: {
                    if (p.contains("marked")) {
                        MarkedProcessSpec spec;
                        const auto& j = p.at("marked");
                        spec.mark_values = j.at("mark_values").get<std::vector<double>>();
                        for (const auto& s : j.at("stages")) {
                            MarkedStage stage;
                            stage.rate = s.at("rate").get<double>();
                            stage.mark_probs = s.at("probs").get<std::vector<double>>();
                            spec.stages.push_back(std::move(stage));
                        }
                        spec.validate();
                        if (p.value("subset", std::vector<int>{0}).empty())
                            fail("params.subset: must not be empty");
                    }
                    break;
                }
                case ExperimentKind::Hedge: {
                    if (!(p.value("s0", 100.0) > 0.0)) fail("params.s0: must be positive");
                    if (!(p.value("sigma", 0.2) > 0.0)) fail("params.sigma: must be positive");
                    if (p.value("strike", 100.0) < 0.0) fail("params.strike: must be >= 0");
                    if (p.value("rate", 0.05) < 0.0) fail("params.rate: must be >= 0");
                    break;
                }
            }
        } catch (const std::exception& e) {
            fail(std::string("params: ") + e.what());
        }
    }

    if (!result.errors.empty()) return result;
    cfg.grid = TimeGrid(horizon, steps);
    result.config = std::move(cfg);
    return result;
}

bool RunReport::all_passed() const {
    for (const auto& check : checks)
        if (!check.passed) return false;
    return true;
}

ordered_json RunReport::to_json() const {
    ordered_json j;
    j["config"] = config_echo;
    j["checks"] = ordered_json::array();
    for (const auto& check : checks) {
        ordered_json c;
        c["name"] = check.name;
        c["statistic"] = check.statistic;
        c["tolerance"] = check.tolerance;
        c["passed"] = check.passed;
        j["checks"].push_back(std::move(c));
    }
    j["overall"] = all_passed() ? "pass" : "fail";
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    j["artifacts"] = artifacts;
    j["wall_clock_ms"] = wall_clock_ms;
    return j;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    std::filesystem::create_directories(cfg.out_dir);

    RunReport report;
    report.config_echo["kind"] = kind_name(cfg.kind);
    report.config_echo["grid"] = {{"T", cfg.grid.horizon}, {"M", cfg.grid.steps}};
    report.config_echo["n_paths"] = cfg.n_paths;
    report.config_echo["seed"] = cfg.seed;
    report.config_echo["threads"] = cfg.threads;
    report.config_echo["max_csv_paths"] = cfg.max_csv_paths;
    report.config_echo["out_dir"] = cfg.out_dir.string();
    report.config_echo["params"] = cfg.params;

    switch (cfg.kind) {
        case ExperimentKind::Simulate: run_simulate(cfg, report); break;
        case ExperimentKind::Chaos: run_chaos(cfg, report); break;
        case ExperimentKind::ClarkOcone: run_clark_ocone(cfg, report); break;
        case ExperimentKind::JumpCo: run_jump_co(cfg, report); break;
        case ExperimentKind::LevyCo: run_levy_co(cfg, report); break;
        case ExperimentKind::Girsanov: run_girsanov(cfg, report); break;
        case ExperimentKind::Teugels: run_teugels(cfg, report); break;
        case ExperimentKind::Compensator: run_compensator(cfg, report); break;
        case ExperimentKind::Hedge: run_hedge(cfg, report); break;
    }

    std::sort(report.artifacts.begin(), report.artifacts.end());
    const auto end = std::chrono::steady_clock::now();
    report.wall_clock_ms =
        std::chrono::duration_cast<std::chrono::microseconds>(end - start).count() / 1000.0;

    const auto report_file = cfg.out_dir / "report.json";
    report.artifacts.push_back(report_file.string());
    std::ofstream out(report_file);
    out << report.to_json().dump(2) << "\n";
    return report;
}

}  // namespace mrtkit
