#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mrtkit/experiment.hpp"

namespace {

int run(mrtkit::ExperimentKind kind, const std::string& config_path,
        const std::optional<std::uint64_t>& seed_flag,
        const std::optional<std::string>& out_flag, const std::optional<int>& threads_flag) {
    std::string text = "{}";
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "mrtkit: cannot open config '" << config_path << "'\n";
            return 1;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    }

    auto parsed = mrtkit::parse_config(text, kind);
    if (!parsed.ok()) {
        for (const auto& err : parsed.errors) std::cerr << "mrtkit: " << err << "\n";
        return 1;
    }
    mrtkit::ExperimentConfig cfg = *parsed.config;

    // precedence: flags > config > MRTKIT_SEED env > default
    if (const char* env = std::getenv("MRTKIT_SEED");
        env && !seed_flag && !nlohmann::json::parse(text).contains("seed")) {
        cfg.seed = std::strtoull(env, nullptr, 10);
    }
    if (seed_flag) cfg.seed = *seed_flag;
    if (out_flag) cfg.out_dir = *out_flag;
    if (threads_flag) cfg.threads = *threads_flag;

    try {
        const mrtkit::RunReport report = mrtkit::run_experiment(cfg);
        for (const auto& check : report.checks) {
            std::printf("%-44s %-4s statistic=%.6g tolerance=%.6g\n", check.name.c_str(),
                        check.passed ? "PASS" : "FAIL", check.statistic, check.tolerance);
        }
        std::printf("overall: %s (report: %s)\n", report.all_passed() ? "pass" : "fail",
                    (cfg.out_dir / "report.json").string().c_str());
        return report.all_passed() ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "mrtkit: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"martingale representation and hedging-integrand toolkit"};
    app.require_subcommand(1);

    struct Shared {
        std::string config;
        std::optional<std::uint64_t> seed;
        std::optional<std::string> out;
        std::optional<int> threads;
    };
    Shared shared;
    int exit_code = 1;

    for (const auto& name : mrtkit::experiment_kind_names()) {
        CLI::App* sub = app.add_subcommand(name, name + " experiment");
        sub->add_option("--config", shared.config, "JSON config file");
        sub->add_option("--seed", shared.seed, "override the RNG seed");
        sub->add_option("--out", shared.out, "output directory");
        sub->add_option("--threads", shared.threads,
                        "worker threads (results do not depend on this)");
        sub->callback([&, name] {
            exit_code = run(*mrtkit::kind_from_name(name), shared.config, shared.seed,
                            shared.out, shared.threads);
        });
    }

    CLI11_PARSE(app, argc, argv);
    return exit_code;
}
