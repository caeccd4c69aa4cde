#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrtkit/time_grid.hpp"

namespace mrtkit {

// Dense per-path, per-column array (path-major layout).
class PathSeries {
public:
    PathSeries() = default;
    PathSeries(int n_paths, int n_cols, double init = 0.0)
        : n_paths_(n_paths), n_cols_(n_cols),
          data_(static_cast<std::size_t>(n_paths) * n_cols, init) {}

    double& at(int path, int col) { return data_[idx(path, col)]; }
    double at(int path, int col) const { return data_[idx(path, col)]; }

    std::span<double> row(int path) {
        return {data_.data() + idx(path, 0), static_cast<std::size_t>(n_cols_)};
    }
    std::span<const double> row(int path) const {
        return {data_.data() + idx(path, 0), static_cast<std::size_t>(n_cols_)};
    }

    int n_paths() const { return n_paths_; }
    int n_cols() const { return n_cols_; }
    bool empty() const { return data_.empty(); }

private:
    std::size_t idx(int path, int col) const {
        return static_cast<std::size_t>(path) * n_cols_ + col;
    }
    int n_paths_ = 0;
    int n_cols_ = 0;
    std::vector<double> data_;
};

// Exact jump times and marks of one path; times strictly increasing.
struct JumpRecord {
    std::vector<double> times;
    std::vector<double> marks;
};

struct MarkLaw {
    enum class Kind { Discrete, Gaussian };
    Kind kind = Kind::Discrete;
    std::vector<double> values{1.0};  // Discrete
    std::vector<double> probs{1.0};
    double mean = 0.0;  // Gaussian
    double sd = 1.0;

    static MarkLaw unit() { return MarkLaw{}; }
    static MarkLaw discrete(std::vector<double> v, std::vector<double> p) {
        MarkLaw law;
        law.kind = Kind::Discrete;
        law.values = std::move(v);
        law.probs = std::move(p);
        return law;
    }
    static MarkLaw gaussian(double mean, double sd) {
        MarkLaw law;
        law.kind = Kind::Gaussian;
        law.mean = mean;
        law.sd = sd;
        return law;
    }

    void validate() const;
    double moment(int i) const;  // E[mark^i], exact
};

// Levy triple restricted to finite activity: drift, diffusion, and a
// compound-Poisson jump part with intensity lambda and the given mark law.
struct LevySpec {
    double drift = 0.0;
    double sigma = 0.0;
    double lambda = 0.0;
    MarkLaw marks = MarkLaw::unit();

    void validate() const;
};

// Immutable-after-construction container of simulated channels on a shared
// grid. Channels hold one value per grid point (columns 0..M).
class PathBundle {
public:
    PathBundle() = default;
    PathBundle(TimeGrid grid, int n_paths, std::uint64_t seed)
        : grid_(grid), n_paths_(n_paths), seed_(seed) {
        if (n_paths < 1) throw std::invalid_argument("PathBundle: n_paths must be >= 1");
    }

    const TimeGrid& grid() const { return grid_; }
    int n_paths() const { return n_paths_; }
    std::uint64_t seed() const { return seed_; }

    bool has_channel(const std::string& name) const { return channels_.count(name) > 0; }
    const PathSeries& channel(const std::string& name) const {
        auto it = channels_.find(name);
        if (it == channels_.end())
            throw std::invalid_argument("PathBundle: missing channel '" + name + "'");
        return it->second;
    }
    PathSeries& add_channel(const std::string& name) {
        auto [it, fresh] = channels_.emplace(name, PathSeries(n_paths_, grid_.points()));
        if (!fresh) throw std::invalid_argument("PathBundle: duplicate channel '" + name + "'");
        return it->second;
    }
    PathSeries& mutable_channel(const std::string& name) {
        auto it = channels_.find(name);
        if (it == channels_.end())
            throw std::invalid_argument("PathBundle: missing channel '" + name + "'");
        return it->second;
    }
    std::vector<std::string> channel_names() const {
        std::vector<std::string> out;
        out.reserve(channels_.size());
        for (const auto& [name, series] : channels_) out.push_back(name);
        return out;
    }

    bool has_jump_records() const { return !jump_records_.empty(); }
    const std::vector<JumpRecord>& jump_records() const { return jump_records_; }
    std::vector<JumpRecord>& mutable_jump_records() { return jump_records_; }

    const std::optional<LevySpec>& levy_spec() const { return levy_spec_; }
    void set_levy_spec(LevySpec spec) { levy_spec_ = std::move(spec); }

    // Copy with one extra channel; the source is left untouched.
    PathBundle with_channel(const std::string& name, PathSeries series) const {
        PathBundle out = *this;
        if (out.channels_.count(name))
            throw std::invalid_argument("PathBundle: duplicate channel '" + name + "'");
        out.channels_.emplace(name, std::move(series));
        return out;
    }

private:
    TimeGrid grid_;
    int n_paths_ = 0;
    std::uint64_t seed_ = 0;
    std::map<std::string, PathSeries> channels_;
    std::vector<JumpRecord> jump_records_;
    std::optional<LevySpec> levy_spec_;
};

// Read access to one path, optionally with one extra jump of mark z
// inserted at time tau. Jump-driven channels are shifted for grid points
// at or after tau; Brownian channels are untouched.
class PathView {
public:
    PathView(const PathBundle& bundle, int path)
        : bundle_(&bundle), path_(path) {}
    PathView(const PathBundle& bundle, int path, double extra_time, double extra_mark)
        : bundle_(&bundle), path_(path), has_extra_(true),
          extra_time_(extra_time), extra_mark_(extra_mark) {}

    const TimeGrid& grid() const { return bundle_->grid(); }
    int path() const { return path_; }
    const PathBundle& bundle() const { return *bundle_; }

    double value(const std::string& channel, int step) const {
        double v = bundle_->channel(channel).at(path_, step);
        if (has_extra_ && bundle_->grid().time(step) >= extra_time_)
            v += jump_shift(channel);
        return v;
    }

    double value_at_time(const std::string& channel, double t) const {
        const int k = bundle_->grid().index_of(t);
        if (k < 0)
            throw std::invalid_argument("PathView: time " + std::to_string(t) +
                                        " is not on the grid");
        return value(channel, k);
    }

private:
    double jump_shift(const std::string& channel) const {
        if (channel == "N") return 1.0;
        if (channel == "Nbar" || channel == "compjump" || channel == "total")
            return extra_mark_;
        if (channel == "bigjump") return std::abs(extra_mark_) > 1.0 ? extra_mark_ : 0.0;
        return 0.0;
    }

    const PathBundle* bundle_;
    int path_;
    bool has_extra_ = false;
    double extra_time_ = 0.0;
    double extra_mark_ = 0.0;
};

}  // namespace mrtkit
