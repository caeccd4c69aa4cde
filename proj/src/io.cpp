#include "mrtkit/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mrtkit {

namespace {

void write_double(std::FILE* f, double v) { std::fprintf(f, "%.17g", v); }

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_for_write(const std::filesystem::path& file) {
    FilePtr f(std::fopen(file.string().c_str(), "w"));
    if (!f) throw std::runtime_error("cannot open '" + file.string() + "' for writing");
    return f;
}

}  // namespace

void export_channels_csv(const PathBundle& bundle, const std::filesystem::path& file,
                         int max_paths) {
    FilePtr f = open_for_write(file);
    const TimeGrid& grid = bundle.grid();
    std::fprintf(f.get(), "path_id,channel");
    for (int k = 0; k <= grid.steps; ++k) std::fprintf(f.get(), ",t_%d", k);
    std::fprintf(f.get(), "\n");

    const int limit =
        max_paths > 0 ? std::min(max_paths, bundle.n_paths()) : bundle.n_paths();
    for (int p = 0; p < limit; ++p) {
        for (const auto& name : bundle.channel_names()) {
            std::fprintf(f.get(), "%d,%s", p, name.c_str());
            auto row = bundle.channel(name).row(p);
            for (int k = 0; k <= grid.steps; ++k) {
                std::fputc(',', f.get());
                write_double(f.get(), row[k]);
            }
            std::fputc('\n', f.get());
        }
    }
}

nlohmann::ordered_json bundle_manifest(const PathBundle& bundle) {
    nlohmann::ordered_json j;
    j["grid"] = {{"T", bundle.grid().horizon}, {"M", bundle.grid().steps}};
    j["n_paths"] = bundle.n_paths();
    j["seed"] = bundle.seed();
    j["channels"] = bundle.channel_names();
    if (bundle.levy_spec()) {
        const LevySpec& spec = *bundle.levy_spec();
        nlohmann::ordered_json s;
        s["drift"] = spec.drift;
        s["sigma"] = spec.sigma;
        s["lambda"] = spec.lambda;
        if (spec.marks.kind == MarkLaw::Kind::Discrete) {
            s["marks"] = {{"kind", "discrete"},
                          {"values", spec.marks.values},
                          {"probs", spec.marks.probs}};
        } else {
            s["marks"] = {{"kind", "gaussian"},
                          {"mean", spec.marks.mean},
                          {"sd", spec.marks.sd}};
        }
        j["levy_spec"] = std::move(s);
    }
    return j;
}

void export_manifest(const PathBundle& bundle, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open '" + file.string() + "' for writing");
    out << bundle_manifest(bundle).dump(2) << "\n";
}

PathBundle import_bundle(const std::filesystem::path& manifest_file,
                         const std::filesystem::path& csv_file) {
    std::ifstream mf(manifest_file);
    if (!mf) throw std::runtime_error("cannot open '" + manifest_file.string() + "'");
    nlohmann::json manifest = nlohmann::json::parse(mf);

    const TimeGrid grid(manifest.at("grid").at("T").get<double>(),
                        manifest.at("grid").at("M").get<int>());
    const int n_paths = manifest.at("n_paths").get<int>();
    PathBundle bundle(grid, n_paths, manifest.at("seed").get<std::uint64_t>());
    if (manifest.contains("levy_spec")) {
        const auto& s = manifest["levy_spec"];
        LevySpec spec;
        spec.drift = s.at("drift").get<double>();
        spec.sigma = s.at("sigma").get<double>();
        spec.lambda = s.at("lambda").get<double>();
        const auto& marks = s.at("marks");
        if (marks.at("kind") == "discrete")
            spec.marks = MarkLaw::discrete(marks.at("values").get<std::vector<double>>(),
                                           marks.at("probs").get<std::vector<double>>());
        else
            spec.marks = MarkLaw::gaussian(marks.at("mean").get<double>(),
                                           marks.at("sd").get<double>());
        bundle.set_levy_spec(spec);
    }

    std::ifstream csv(csv_file);
    if (!csv) throw std::runtime_error("cannot open '" + csv_file.string() + "'");
    std::string line;
    std::getline(csv, line);  // header
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        const int path = std::stoi(cell);
        std::getline(row, cell, ',');
        const std::string channel = cell;
        if (!bundle.has_channel(channel)) bundle.add_channel(channel);
        PathSeries& series = bundle.mutable_channel(channel);
        for (int k = 0; k <= grid.steps; ++k) {
            std::getline(row, cell, ',');
            series.at(path, k) = std::stod(cell);
        }
    }
    return bundle;
}

void export_integrand_csv(const IntegrandEstimate& integrand,
                          const std::filesystem::path& file, int max_paths) {
    FilePtr f = open_for_write(file);
    std::fprintf(f.get(), "t,path_id,channel,value\n");
    for (const auto& [channel, values] : integrand.blocks) {
        const int limit =
            max_paths > 0 ? std::min(max_paths, values.n_paths()) : values.n_paths();
        for (int m = 0; m < values.n_cols(); ++m) {
            const double t = integrand.grid.time(m);
            for (int p = 0; p < limit; ++p) {
                write_double(f.get(), t);
                std::fprintf(f.get(), ",%d,%s,", p, channel.c_str());
                write_double(f.get(), values.at(p, m));
                std::fputc('\n', f.get());
            }
        }
    }
}

void export_weights_csv(const std::vector<double>& weights,
                        const std::filesystem::path& file) {
    FilePtr f = open_for_write(file);
    std::fprintf(f.get(), "path_id,weight\n");
    for (std::size_t p = 0; p < weights.size(); ++p) {
        std::fprintf(f.get(), "%zu,", p);
        write_double(f.get(), weights[p]);
        std::fputc('\n', f.get());
    }
}

void export_matrix_csv(const std::vector<std::vector<double>>& rows,
                       const std::filesystem::path& file) {
    FilePtr f = open_for_write(file);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) std::fputc(',', f.get());
            write_double(f.get(), row[i]);
        }
        std::fputc('\n', f.get());
    }
}

nlohmann::ordered_json chaos_to_json(const ChaosExpansion& expansion) {
    nlohmann::ordered_json j;
    j["terms"] = nlohmann::ordered_json::array();
    for (const auto& term : expansion.terms) {
        nlohmann::ordered_json t;
        t["n"] = term.order;
        t["c"] = term.coeff;
        if (term.order > 0)
            t["g"] = {{"breaks", term.kernel.breaks()}, {"vals", term.kernel.vals()}};
        j["terms"].push_back(std::move(t));
    }
    return j;
}

ChaosExpansion chaos_from_json(const nlohmann::json& j) {
    ChaosExpansion expansion;
    for (const auto& t : j.at("terms")) {
        ChaosTerm term;
        term.order = t.at("n").get<int>();
        term.coeff = t.at("c").get<double>();
        if (term.order > 0) {
            term.kernel = StepFunction(t.at("g").at("breaks").get<std::vector<double>>(),
                                       t.at("g").at("vals").get<std::vector<double>>());
        }
        expansion.terms.push_back(std::move(term));
    }
    expansion.validate();
    return expansion;
}

}  // namespace mrtkit
