#pragma once

#include <cstdint>
#include <span>

#include "terratrack/dynamics.hpp"
#include "terratrack/terrain.hpp"
#include "terratrack/types.hpp"

// Hot inner loops of the filter, each in two builds: an OpenMP-parallel
// version used in production and a plain serial reference kept for testing.
// Both must produce bit-identical output — per-particle randomness comes from
// counter-based substreams and all reductions happen outside these loops in
// fixed index order. tools/bench_kernels.cpp compares their throughput.

namespace terratrack::kernels {

/// In-place kinematic propagation of a state array.
void propagate_serial(std::span<TargetState> states, double dt,
                      const NoiseSpec& sigma_w, uint64_t stream_key, uint32_t step);
void propagate_omp(std::span<TargetState> states, double dt,
                   const NoiseSpec& sigma_w, uint64_t stream_key, uint32_t step);
void propagate(std::span<TargetState> states, double dt, const NoiseSpec& sigma_w,
               uint64_t stream_key, uint32_t step, Exec exec);

/// Terrain preference p_t at every state's position.
void terrain_weights_serial(std::span<const TargetState> states,
                            const TerrainMap& map, std::span<double> out);
void terrain_weights_omp(std::span<const TargetState> states, const TerrainMap& map,
                         std::span<double> out);
void terrain_weights(std::span<const TargetState> states, const TerrainMap& map,
                     std::span<double> out, Exec exec);

/// Observation likelihood of one report against every state.
void likelihoods_serial(const Report& report, std::span<const TargetState> states,
                        std::span<double> out);
void likelihoods_omp(const Report& report, std::span<const TargetState> states,
                     std::span<double> out);
void likelihoods(const Report& report, std::span<const TargetState> states,
                 std::span<double> out, Exec exec);

/// Draws out.size() source indices proportional to the weights behind the
/// cumulative table (strictly increasing only at positive weights).
/// Multinomial draws are independent per output slot and keyed by slot index.
void sample_multinomial_serial(std::span<const double> cumulative,
                               uint64_t stream_key, uint32_t step,
                               std::span<uint32_t> out);
void sample_multinomial_omp(std::span<const double> cumulative, uint64_t stream_key,
                            uint32_t step, std::span<uint32_t> out);

/// Systematic (stratified, single offset) variant: one uniform offset places
/// an evenly spaced comb over the cumulative table.
void sample_systematic_serial(std::span<const double> cumulative,
                              uint64_t stream_key, uint32_t step,
                              std::span<uint32_t> out);
void sample_systematic_omp(std::span<const double> cumulative, uint64_t stream_key,
                           uint32_t step, std::span<uint32_t> out);

}  // namespace terratrack::kernels
