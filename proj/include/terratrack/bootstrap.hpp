#pragma once

#include <cstdint>

#include "terratrack/dynamics.hpp"
#include "terratrack/phd.hpp"
#include "terratrack/terrain.hpp"
#include "terratrack/types.hpp"

namespace terratrack {

/// Single-target bootstrap filter step: propagate every particle through the
/// shared motion model, weight by the observation likelihood, normalize to
/// total weight one and resample the same particle count back to equal
/// weights. Exercises the same kernels as the multi-target filter.
/// Throws when every particle has zero likelihood for the report.
WeightedCloud bootstrap_step(const WeightedCloud& cloud, const Report& report,
                             double dt, const NoiseSpec& sigma_w,
                             const TerrainMap& map, uint64_t stream_key,
                             uint32_t step, TerrainMode mode = TerrainMode::Resample,
                             ResampleScheme scheme = ResampleScheme::Multinomial,
                             Exec exec = Exec::Parallel);

}  // namespace terratrack
