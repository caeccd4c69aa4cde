#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrtkit/time_grid.hpp"

namespace mrtkit {

enum class ExperimentKind {
    Simulate,
    Chaos,
    ClarkOcone,
    JumpCo,
    LevyCo,
    Girsanov,
    Teugels,
    Compensator,
    Hedge
};

const std::vector<std::string>& experiment_kind_names();
std::optional<ExperimentKind> kind_from_name(const std::string& name);
const std::string& kind_name(ExperimentKind kind);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Simulate;
    TimeGrid grid{1.0, 512};
    int n_paths = 10000;
    std::uint64_t seed = 12345;
    int threads = 1;
    int max_csv_paths = 1000;  // cap on rows in channel/integrand CSV artifacts
    std::filesystem::path out_dir = "out";
    nlohmann::json params = nlohmann::json::object();
};

struct ConfigParseResult {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;
    bool ok() const { return errors.empty() && config.has_value(); }
};

// Parse and validate a config document. Collects every violation rather
// than stopping at the first; malformed JSON is reported with the parser's
// byte offset. kind_override (from the CLI subcommand) wins over the
// document's "kind" and the two must agree when both are present.
ConfigParseResult parse_config(const std::string& text,
                               std::optional<ExperimentKind> kind_override = {});

struct CheckResult {
    std::string name;
    double statistic = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct RunReport {
    nlohmann::ordered_json config_echo;
    std::vector<CheckResult> checks;
    std::vector<std::string> artifacts;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
    double wall_clock_ms = 0.0;

    bool all_passed() const;
    nlohmann::ordered_json to_json() const;
};

// Executes the configured experiment, writes its artifacts (report.json is
// always written, pass or fail) and returns the report.
RunReport run_experiment(const ExperimentConfig& cfg);

}  // namespace mrtkit
