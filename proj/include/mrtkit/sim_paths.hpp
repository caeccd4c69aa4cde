#pragma once

#include <cstdint>

#include "mrtkit/path_bundle.hpp"

namespace mrtkit {

// Options shared by all generators. first_path offsets the per-path RNG
// stream index so a large population can be generated in chunks that are
// bit-identical to one-shot generation; threads parallelizes over paths
// without changing any output value.
struct GenOptions {
    int threads = 1;
    std::int64_t first_path = 0;
};

// Independent standard Brownian channels "W.0".."W.<dims-1>", increments
// Gaussian(0, dt), all starting at 0.
PathBundle gen_brownian(const TimeGrid& grid, int n_paths, int dims, std::uint64_t seed,
                        const GenOptions& opt = {});

// Poisson count channel "N" (right-continuous, sampled at grid points) and
// compensated channel "Nbar" = N - lambda*t; jump records carry exact times
// with unit marks.
PathBundle gen_compensated_poisson(const TimeGrid& grid, double lambda, int n_paths,
                                   std::uint64_t seed, const GenOptions& opt = {});

// Finite-activity jump diffusion split into channels "drift" (beta*t),
// "diff" (sigma*W_t, with the unit Brownian motion kept as "W.0"),
// "compjump" (sum of marks minus lambda*E[mark]*t), "bigjump" (marks with
// |mark| > 1, uncompensated) and "total" = drift + diff + compjump.
PathBundle gen_levy(const LevySpec& spec, const TimeGrid& grid, int n_paths,
                    std::uint64_t seed, const GenOptions& opt = {});

// Maps exact jump times to channel sampling indices: nearest grid point,
// strictly after the previous jump's index. Jumps pushed past the last grid
// point are dropped from the channels (their exact records remain).
std::vector<int> snap_jump_indices(const std::vector<double>& times, const TimeGrid& grid);

}  // namespace mrtkit
