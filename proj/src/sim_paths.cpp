#include "mrtkit/sim_paths.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "mrtkit/rng.hpp"

namespace mrtkit {

namespace {

// RNG substream ids per path; fixed so channel draws never interleave.
constexpr std::uint32_t kSubstreamBrownianBase = 0;   // + channel dim
constexpr std::uint32_t kSubstreamJumpTimes = 1000;
constexpr std::uint32_t kSubstreamJumpMarks = 1001;

void run_over_paths(int n_paths, int threads, const std::function<void(int, int)>& body) {
    if (threads <= 1 || n_paths < 2) {
        body(0, n_paths);
        return;
    }
    threads = std::min(threads, n_paths);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const int chunk = (n_paths + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(n_paths, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(body, lo, hi);
    }
    for (auto& th : pool) th.join();
}

std::uint32_t stream_of(std::int64_t first_path, int path) {
    return static_cast<std::uint32_t>(first_path + path);
}

// One exponential-clock jump sequence on (0, T]; times strictly increasing.
void draw_jump_times(PhiloxRng& rng, double lambda, double horizon, std::vector<double>& out) {
    out.clear();
    if (lambda <= 0.0) return;
    double t = rng.exponential(lambda);
    while (t <= horizon) {
        if (!out.empty() && t <= out.back()) t = std::nextafter(out.back(), horizon * 2);
        if (t > horizon) break;
        out.push_back(t);
        t += rng.exponential(lambda);
    }
}

}  // namespace

std::vector<int> snap_jump_indices(const std::vector<double>& times, const TimeGrid& grid) {
    std::vector<int> out;
    out.reserve(times.size());
    int prev = 0;
    for (double t : times) {
        int k = static_cast<int>(std::lround(t / grid.dt()));
        if (k <= prev) k = prev + 1;
        if (k > grid.steps) break;  // fell off the channel grid
        out.push_back(k);
        prev = k;
    }
    return out;
}

PathBundle gen_brownian(const TimeGrid& grid, int n_paths, int dims, std::uint64_t seed,
                        const GenOptions& opt) {
    if (n_paths < 1) throw std::invalid_argument("gen_brownian: n_paths must be >= 1");
    if (dims < 1) throw std::invalid_argument("gen_brownian: dims must be >= 1");

    PathBundle bundle(grid, n_paths, seed);
    std::vector<PathSeries*> w(dims);
    for (int d = 0; d < dims; ++d) w[d] = &bundle.add_channel("W." + std::to_string(d));

    const double sqdt = std::sqrt(grid.dt());
    run_over_paths(n_paths, opt.threads, [&](int lo, int hi) {
        for (int p = lo; p < hi; ++p) {
            for (int d = 0; d < dims; ++d) {
                PhiloxRng rng(seed, stream_of(opt.first_path, p), kSubstreamBrownianBase + d);
                auto row = w[d]->row(p);
                row[0] = 0.0;
                for (int m = 0; m < grid.steps; ++m)
                    row[m + 1] = row[m] + sqdt * rng.gaussian();
            }
        }
    });
    return bundle;
}

PathBundle gen_compensated_poisson(const TimeGrid& grid, double lambda, int n_paths,
                                   std::uint64_t seed, const GenOptions& opt) {
    if (lambda < 0.0) throw std::invalid_argument("gen_compensated_poisson: lambda must be >= 0");
    if (n_paths < 1) throw std::invalid_argument("gen_compensated_poisson: n_paths must be >= 1");

    PathBundle bundle(grid, n_paths, seed);
    PathSeries& count = bundle.add_channel("N");
    PathSeries& nbar = bundle.add_channel("Nbar");
    auto& records = bundle.mutable_jump_records();
    records.resize(n_paths);

    LevySpec spec;
    spec.lambda = lambda;
    spec.marks = MarkLaw::unit();
    bundle.set_levy_spec(spec);

    run_over_paths(n_paths, opt.threads, [&](int lo, int hi) {
        for (int p = lo; p < hi; ++p) {
            PhiloxRng rng(seed, stream_of(opt.first_path, p), kSubstreamJumpTimes);
            auto& rec = records[p];
            draw_jump_times(rng, lambda, grid.horizon, rec.times);
            rec.marks.assign(rec.times.size(), 1.0);

            const std::vector<int> snap = snap_jump_indices(rec.times, grid);
            auto n_row = count.row(p);
            auto nb_row = nbar.row(p);
            std::size_t j = 0;
            double n = 0.0;
            for (int k = 0; k <= grid.steps; ++k) {
                while (j < snap.size() && snap[j] == k) {
                    n += 1.0;
                    ++j;
                }
                n_row[k] = n;
                nb_row[k] = n - lambda * grid.time(k);
            }
        }
    });
    return bundle;
}

PathBundle gen_levy(const LevySpec& spec, const TimeGrid& grid, int n_paths,
                    std::uint64_t seed, const GenOptions& opt) {
    spec.validate();
    if (n_paths < 1) throw std::invalid_argument("gen_levy: n_paths must be >= 1");

    PathBundle bundle(grid, n_paths, seed);
    PathSeries& w = bundle.add_channel("W.0");
    PathSeries& drift = bundle.add_channel("drift");
    PathSeries& diff = bundle.add_channel("diff");
    PathSeries& compjump = bundle.add_channel("compjump");
    PathSeries& bigjump = bundle.add_channel("bigjump");
    PathSeries& total = bundle.add_channel("total");
    auto& records = bundle.mutable_jump_records();
    records.resize(n_paths);
    bundle.set_levy_spec(spec);

    const double sqdt = std::sqrt(grid.dt());
    const double mean_mark = spec.marks.moment(1);

    run_over_paths(n_paths, opt.threads, [&](int lo, int hi) {
        for (int p = lo; p < hi; ++p) {
            PhiloxRng wrng(seed, stream_of(opt.first_path, p), kSubstreamBrownianBase);
            auto w_row = w.row(p);
            w_row[0] = 0.0;
            for (int m = 0; m < grid.steps; ++m)
                w_row[m + 1] = w_row[m] + sqdt * wrng.gaussian();

            auto& rec = records[p];
            PhiloxRng trng(seed, stream_of(opt.first_path, p), kSubstreamJumpTimes);
            draw_jump_times(trng, spec.lambda, grid.horizon, rec.times);
            rec.marks.resize(rec.times.size());
            PhiloxRng mrng(seed, stream_of(opt.first_path, p), kSubstreamJumpMarks);
            for (double& z : rec.marks) {
                if (spec.marks.kind == MarkLaw::Kind::Gaussian) {
                    z = spec.marks.mean + spec.marks.sd * mrng.gaussian();
                } else {
                    const double u = mrng.uniform();
                    double acc = 0.0;
                    z = spec.marks.values.back();
                    for (std::size_t k = 0; k < spec.marks.values.size(); ++k) {
                        acc += spec.marks.probs[k];
                        if (u <= acc) {
                            z = spec.marks.values[k];
                            break;
                        }
                    }
                }
            }

            const std::vector<int> snap = snap_jump_indices(rec.times, grid);
            auto dr = drift.row(p);
            auto df = diff.row(p);
            auto cj = compjump.row(p);
            auto bj = bigjump.row(p);
            auto tot = total.row(p);
            std::size_t j = 0;
            double jump_sum = 0.0;
            double big_sum = 0.0;
            for (int k = 0; k <= grid.steps; ++k) {
                while (j < snap.size() && snap[j] == k) {
                    jump_sum += rec.marks[j];
                    if (std::abs(rec.marks[j]) > 1.0) big_sum += rec.marks[j];
                    ++j;
                }
                const double t = grid.time(k);
                dr[k] = spec.drift * t;
                df[k] = spec.sigma * w_row[k];
                cj[k] = jump_sum - spec.lambda * mean_mark * t;
                bj[k] = big_sum;
                tot[k] = dr[k] + df[k] + cj[k];
            }
        }
    });
    return bundle;
}

}  // namespace mrtkit
