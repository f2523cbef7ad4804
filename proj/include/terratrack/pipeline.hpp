#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "terratrack/bootstrap.hpp"
#include "terratrack/gmm.hpp"
#include "terratrack/phd.hpp"
#include "terratrack/terrain.hpp"

// End-to-end tracking driver: runs the filter over a report sequence and
// fits the peak mixture each step. One user seed fans out to the named
// streams, so the same seed and configuration always produce the same output
// regardless of thread count.

namespace terratrack {

enum class FilterKind { Phd, Bootstrap };

struct TrackConfig {
    uint64_t seed = 1;
    int n_per_unit = 1000;
    double p_fn = 0.1;
    double k_const = 0.01;
    double dt = 5.0;
    double max_count = 5.0;
    NoiseSpec sigma_w{10.0, 10.0, 2.0, kPi / 4.0};
    ResampleScheme scheme = ResampleScheme::Multinomial;
    TerrainMode terrain_mode = TerrainMode::Resample;
    Exec exec = Exec::Parallel;
    FilterKind filter = FilterKind::Phd;
    int steps = -1;  // -1: run through the last reported step

    FilterParams filter_params() const {
        FilterParams p;
        p.n_per_unit = n_per_unit;
        p.p_fn = p_fn;
        p.k_const = k_const;
        p.sigma_w = sigma_w;
        p.max_count = max_count;
        p.dt = dt;
        return p;
    }
};

struct StepTiming {
    double predict_ms = 0.0;
    double update_ms = 0.0;
    double resample_ms = 0.0;
    double gmm_ms = 0.0;
};

struct TrackResult {
    std::vector<FilterOutput> outputs;  // one per step, peaks filled
    std::vector<StepTiming> timings;
};

/// Called after each step with the resampled posterior and the fitted mixture
/// (null when no fit was attempted). Used for the optional dump files.
using StepHook =
    std::function<void(int step, const PhdParticleSet&, const GaussianMixture*)>;

TrackResult run_track(const TerrainMap& map,
                      const std::vector<std::vector<Report>>& reports_by_step,
                      const TrackConfig& config, const StepHook& hook = {});

/// Peak fitting for one posterior: chooses k from `count_for_k`, fits, and
/// extracts peaks whose masses split `expected_count`. Falls back to fewer
/// components when the support has fewer distinct positions than k. Returns
/// fit presence.
///
/// The tracker passes a short running maximum of the expected count as
/// `count_for_k`: a target goes unobserved for 1/(1 - p_fn) steps on average,
/// and dropping its mixture component on the first missed report would lose
/// the peak exactly when the filter still carries its mass.
bool fit_peaks(const PhdParticleSet& posterior, double count_for_k,
               double expected_count, uint64_t stream_key, std::vector<Peak>& peaks,
               GaussianMixture* mixture);

/// Steps of expected-count history consulted when choosing the component
/// count: the mean observation gap plus the one-step birth lag.
int count_window(double p_fn);

}  // namespace terratrack
