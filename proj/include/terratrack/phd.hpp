#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "terratrack/dynamics.hpp"
#include "terratrack/sensing.hpp"
#include "terratrack/terrain.hpp"
#include "terratrack/types.hpp"

// Multi-target intensity filter over weighted particles. The cloud's total
// mass is the expected number of targets; per-step bookkeeping keeps that sum
// exact so the cardinality recursion
//   n_t = n_t^Z + p_fn * (p_b * n_{t-1}^Z + (1 - p_d) * n_{t-1}^X)
// holds to rounding error before the max_count clamp.

namespace terratrack {

/// Posterior particle set after resampling: equal weights, mass equal to the
/// expected target count, round(mass * n_per_unit) particles.
struct PhdParticleSet {
    WeightedCloud cloud;
    int step = 0;
    double expected_count = 0.0;
};

struct Peak {
    double x = 0.0;
    double y = 0.0;
    double mass = 0.0;
};

/// Per-step result record. `peaks` is filled by the mixture-fitting stage;
/// `raw_mass` is the posterior mass before the max_count clamp.
struct FilterOutput {
    int step = 0;
    double expected_count = 0.0;
    double raw_mass = 0.0;
    std::vector<Peak> peaks;
    std::vector<int> skipped_reports;  // update blocks with no particle support
};

enum class ResampleScheme { Multinomial, Systematic };

// ---- weight-space core -----------------------------------------------------
// The update and the resampling draw are state-agnostic: they see particle
// weights and per-report likelihood values only. Keeping them separate lets
// tests drive the exact same arithmetic on toy state spaces.

struct WeightUpdateResult {
    std::vector<double> weights;
    double mass = 0.0;              // (#used reports) + p_fn * prior mass, exact
    std::vector<int> skipped;       // report indices with an underflowed normalizer
};

/// Collapsed multi-observation update:
///   w_out[s] = w[s] * (p_fn + sum_i L_i[s] / C_i),  C_i = sum_s w[s] * L_i[s].
/// Algebraically identical to concatenating one normalized copy of the prior
/// per report plus a p_fn-scaled original, without materializing the copies.
WeightUpdateResult update_weights(std::span<const double> prior_weights,
                                  const std::vector<std::vector<double>>& likelihoods,
                                  double prior_mass, double p_fn,
                                  Exec exec = Exec::Parallel);

/// Draws `count` source indices proportional to the weights.
std::vector<uint32_t> resample_indices(std::span<const double> weights, size_t count,
                                       uint64_t stream_key, uint32_t step,
                                       ResampleScheme scheme, Exec exec);

/// Number of particles representing a cloud of the given mass:
/// round-half-away-from-zero of mass * n_per_unit, with a floor of one
/// particle whenever mass > 1e-3 so rounding cannot extinguish a track.
size_t particle_count_for_mass(double mass, int n_per_unit);

/// Closed-form step of the expected-count recursion (clamped at max_count).
double cardinality_recursion(size_t n_reports_t, size_t n_reports_prev,
                             double n_prev, const FilterParams& params);

// ---- filter operations -----------------------------------------------------

/// Prior for step t-1 -> t: survivors propagated with weight scaled by
/// (1 - p_d), plus one birth cloud of n_per_unit particles per report from
/// step t-1 with weight p_b / n_per_unit each. Prior mass is therefore
/// exactly (1 - p_d) * n_{t-1}^X + p_b * n_{t-1}^Z.
WeightedCloud predict(const PhdParticleSet& posterior_prev,
                      const std::vector<Report>& reports_prev,
                      const FilterParams& params, const TerrainMap& map,
                      uint64_t stream_key, TerrainMode mode = TerrainMode::Resample,
                      Exec exec = Exec::Parallel);

/// Multi-observation update of a non-empty prior (see update_weights).
/// Skipped reports are appended to *skipped when given.
WeightedCloud update(const WeightedCloud& prior, const std::vector<Report>& reports,
                     const FilterParams& params, Exec exec = Exec::Parallel,
                     std::vector<int>* skipped = nullptr);

/// Expected count = total mass, clamped at params.max_count. When the clamp
/// binds, weights are rescaled so mass and count stay equal. Returns the count.
double estimate_count(WeightedCloud& posterior, const FilterParams& params);

/// Draws round(mass * n_per_unit) equally weighted particles in proportion to
/// the posterior weights. Zero mass yields an empty set.
PhdParticleSet resample(const WeightedCloud& posterior, int n_per_unit,
                        uint64_t stream_key, uint32_t step,
                        ResampleScheme scheme = ResampleScheme::Multinomial,
                        Exec exec = Exec::Parallel);

/// One full step: predict -> update -> estimate_count -> resample.
/// reports_prev must be the set passed as reports_t in the previous call.
/// An empty prior (cold start) yields an empty posterior with every report
/// recorded as skipped; births then enter through the next step's predict.
std::pair<PhdParticleSet, FilterOutput> filter_step(
    const PhdParticleSet& state, const std::vector<Report>& reports_prev,
    const std::vector<Report>& reports_t, const FilterParams& params,
    const TerrainMap& map, uint64_t stream_key,
    TerrainMode mode = TerrainMode::Resample,
    ResampleScheme scheme = ResampleScheme::Multinomial, Exec exec = Exec::Parallel);

}  // namespace terratrack
