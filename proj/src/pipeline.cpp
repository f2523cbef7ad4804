#include "terratrack/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "terratrack/rng.hpp"
#include "terratrack/sensing.hpp"

namespace terratrack {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

TrackResult run_phd(const TerrainMap& map,
                    const std::vector<std::vector<Report>>& reports_by_step,
                    const TrackConfig& config, const StepHook& hook, int steps) {
    const FilterParams params = config.filter_params();
    params.require_valid();
    const uint64_t filter_key = rng::derive_stream(config.seed, "filter");
    const uint64_t gmm_key = rng::derive_stream(config.seed, "gmm");
    static const std::vector<Report> kNoReports;

    TrackResult result;
    result.outputs.reserve(static_cast<size_t>(steps));
    result.timings.reserve(static_cast<size_t>(steps));

    std::deque<double> recent_counts;
    const size_t window = static_cast<size_t>(count_window(params.p_fn));

    PhdParticleSet state;
    state.step = -1;  // the first processed step is 0
    for (int step = 0; step < steps; ++step) {
        const std::vector<Report>& prev =
            (step > 0 && static_cast<size_t>(step - 1) < reports_by_step.size())
                ? reports_by_step[static_cast<size_t>(step - 1)]
                : kNoReports;
        const std::vector<Report>& now =
            static_cast<size_t>(step) < reports_by_step.size()
                ? reports_by_step[static_cast<size_t>(step)]
                : kNoReports;

        StepTiming timing;
        const uint64_t step_key = rng::derive_substream(filter_key, static_cast<uint64_t>(step));

        auto t0 = Clock::now();
        WeightedCloud prior = predict(state, prev, params, map, step_key,
                                      config.terrain_mode, config.exec);
        timing.predict_ms = ms_since(t0);

        FilterOutput out;
        out.step = step;
        WeightedCloud posterior;
        t0 = Clock::now();
        if (prior.empty()) {
            for (size_t i = 0; i < now.size(); ++i)
                out.skipped_reports.push_back(static_cast<int>(i));
        } else {
            posterior = update(prior, now, params, config.exec, &out.skipped_reports);
        }
        out.raw_mass = posterior.mass;
        out.expected_count = estimate_count(posterior, params);
        timing.update_ms = ms_since(t0);

        t0 = Clock::now();
        state = resample(posterior, params.n_per_unit,
                         rng::derive_substream(step_key, 2),
                         static_cast<uint32_t>(step), config.scheme, config.exec);
        state.step = step;
        timing.resample_ms = ms_since(t0);

        recent_counts.push_back(out.expected_count);
        if (recent_counts.size() > window) recent_counts.pop_front();
        const double count_for_k =
            *std::max_element(recent_counts.begin(), recent_counts.end());

        t0 = Clock::now();
        GaussianMixture mixture;
        const bool fitted = fit_peaks(state, count_for_k, out.expected_count,
                                      rng::derive_substream(gmm_key, static_cast<uint64_t>(step)),
                                      out.peaks, &mixture);
        timing.gmm_ms = ms_since(t0);

        if (hook) hook(step, state, fitted ? &mixture : nullptr);
        result.outputs.push_back(std::move(out));
        result.timings.push_back(timing);
    }
    return result;
}

TrackResult run_bootstrap(const TerrainMap& map,
                          const std::vector<std::vector<Report>>& reports_by_step,
                          const TrackConfig& config, const StepHook& hook, int steps) {
    const uint64_t filter_key = rng::derive_stream(config.seed, "filter");
    TrackResult result;

    WeightedCloud cloud;
    const size_t n = static_cast<size_t>(config.n_per_unit);

    for (int step = 0; step < steps; ++step) {
        const std::vector<Report>* now =
            static_cast<size_t>(step) < reports_by_step.size()
                ? &reports_by_step[static_cast<size_t>(step)]
                : nullptr;
        if (now && now->size() > 1)
            throw std::runtime_error(
                "bootstrap filter: more than one report at step " +
                std::to_string(step) + "; use the phd filter for multiple targets");

        StepTiming timing;
        FilterOutput out;
        out.step = step;
        const uint64_t step_key =
            rng::derive_substream(filter_key, static_cast<uint64_t>(step));

        if (cloud.empty()) {
            // Seed the posterior from the first report.
            if (now && now->size() == 1) {
                const Report& r = now->front();
                cloud.states.resize(n);
                for (size_t s = 0; s < n; ++s) {
                    rng::Substream rs(step_key, static_cast<uint32_t>(step), s);
                    cloud.states[s] = invert_observation(r, rs);
                }
                cloud.weights.assign(n, 1.0 / static_cast<double>(n));
                cloud.mass = 1.0;
            }
        } else if (now && now->size() == 1) {
            auto t0 = Clock::now();
            cloud = bootstrap_step(cloud, now->front(), config.dt, config.sigma_w, map,
                                   step_key, static_cast<uint32_t>(step),
                                   config.terrain_mode, config.scheme, config.exec);
            timing.update_ms = ms_since(t0);
        } else {
            // No observation this step: prediction only.
            auto t0 = Clock::now();
            cloud = propagate_cloud(cloud, config.dt, config.sigma_w, map,
                                    rng::derive_substream(step_key, 1),
                                    static_cast<uint32_t>(step), config.terrain_mode,
                                    config.exec);
            timing.predict_ms = ms_since(t0);
        }

        if (!cloud.empty()) {
            out.expected_count = 1.0;
            out.raw_mass = 1.0;
            double mx = 0.0, my = 0.0;
            for (size_t s = 0; s < cloud.size(); ++s) {
                mx += cloud.weights[s] * cloud.states[s].x;
                my += cloud.weights[s] * cloud.states[s].y;
            }
            out.peaks.push_back({mx, my, 1.0});
        }

        if (hook) {
            PhdParticleSet view;
            view.cloud = cloud;
            view.step = step;
            view.expected_count = cloud.empty() ? 0.0 : 1.0;
            hook(step, view, nullptr);
        }
        result.outputs.push_back(std::move(out));
        result.timings.push_back(timing);
    }
    return result;
}

}  // namespace

bool fit_peaks(const PhdParticleSet& posterior, double count_for_k,
               double expected_count, uint64_t stream_key, std::vector<Peak>& peaks,
               GaussianMixture* mixture) {
    peaks.clear();
    int k = choose_k(count_for_k);
    if (k == 0 || posterior.cloud.empty()) return false;
    while (k >= 1) {
        try {
            GaussianMixture m = fit(posterior.cloud, k, stream_key);
            peaks = extract_peaks(m, expected_count);
            if (mixture) *mixture = std::move(m);
            return true;
        } catch (const std::invalid_argument&) {
            // Fewer distinct positions than components; retry smaller.
            --k;
        }
    }
    return false;
}

int count_window(double p_fn) {
    return static_cast<int>(std::ceil(1.0 / (1.0 - p_fn))) + 1;
}

TrackResult run_track(const TerrainMap& map,
                      const std::vector<std::vector<Report>>& reports_by_step,
                      const TrackConfig& config, const StepHook& hook) {
    int steps = config.steps;
    if (steps < 0) steps = static_cast<int>(reports_by_step.size());
    if (steps <= 0)
        throw std::invalid_argument("run_track: nothing to do (no steps)");

    if (config.filter == FilterKind::Bootstrap)
        return run_bootstrap(map, reports_by_step, config, hook, steps);
    return run_phd(map, reports_by_step, config, hook, steps);
}

}  // namespace terratrack
