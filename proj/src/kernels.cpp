#include "terratrack/kernels.hpp"

#include <algorithm>

#include "terratrack/rng.hpp"
#include "terratrack/sensing.hpp"

namespace terratrack::kernels {

namespace {

inline uint32_t pick_index(std::span<const double> cumulative, double pos) {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pos);
    size_t idx = static_cast<size_t>(it - cumulative.begin());
    if (idx >= cumulative.size()) idx = cumulative.size() - 1;  // pos rounded up to the total
    return static_cast<uint32_t>(idx);
}

}  // namespace

// ---- propagate -------------------------------------------------------------

void propagate_serial(std::span<TargetState> states, double dt,
                      const NoiseSpec& sigma_w, uint64_t stream_key, uint32_t step) {
    for (size_t i = 0; i < states.size(); ++i) {
        rng::Substream rs(stream_key, step, i);
        kinematic_step(states[i], dt, sigma_w, rs);
    }
}

void propagate_omp(std::span<TargetState> states, double dt, const NoiseSpec& sigma_w,
                   uint64_t stream_key, uint32_t step) {
    const int64_t n = static_cast<int64_t>(states.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
        rng::Substream rs(stream_key, step, static_cast<uint64_t>(i));
        kinematic_step(states[i], dt, sigma_w, rs);
    }
}

void propagate(std::span<TargetState> states, double dt, const NoiseSpec& sigma_w,
               uint64_t stream_key, uint32_t step, Exec exec) {
    if (exec == Exec::Parallel)
        propagate_omp(states, dt, sigma_w, stream_key, step);
    else
        propagate_serial(states, dt, sigma_w, stream_key, step);
}

// ---- terrain weights -------------------------------------------------------

void terrain_weights_serial(std::span<const TargetState> states, const TerrainMap& map,
                            std::span<double> out) {
    for (size_t i = 0; i < states.size(); ++i)
        out[i] = map.weight(states[i].x, states[i].y);
}

void terrain_weights_omp(std::span<const TargetState> states, const TerrainMap& map,
                         std::span<double> out) {
    const int64_t n = static_cast<int64_t>(states.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) out[i] = map.weight(states[i].x, states[i].y);
}

void terrain_weights(std::span<const TargetState> states, const TerrainMap& map,
                     std::span<double> out, Exec exec) {
    if (exec == Exec::Parallel)
        terrain_weights_omp(states, map, out);
    else
        terrain_weights_serial(states, map, out);
}

// ---- likelihoods -----------------------------------------------------------

void likelihoods_serial(const Report& report, std::span<const TargetState> states,
                        std::span<double> out) {
    const LikelihoodModel model(report.noise);
    for (size_t i = 0; i < states.size(); ++i) out[i] = model(report.observed, states[i]);
}

void likelihoods_omp(const Report& report, std::span<const TargetState> states,
                     std::span<double> out) {
    const LikelihoodModel model(report.noise);
    const int64_t n = static_cast<int64_t>(states.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) out[i] = model(report.observed, states[i]);
}

void likelihoods(const Report& report, std::span<const TargetState> states,
                 std::span<double> out, Exec exec) {
    if (exec == Exec::Parallel)
        likelihoods_omp(report, states, out);
    else
        likelihoods_serial(report, states, out);
}

// ---- resampling draws ------------------------------------------------------

void sample_multinomial_serial(std::span<const double> cumulative, uint64_t stream_key,
                               uint32_t step, std::span<uint32_t> out) {
    const double total = cumulative.back();
    for (size_t j = 0; j < out.size(); ++j) {
        rng::Substream rs(stream_key, step, j);
        out[j] = pick_index(cumulative, rs.uniform() * total);
    }
}

void sample_multinomial_omp(std::span<const double> cumulative, uint64_t stream_key,
                            uint32_t step, std::span<uint32_t> out) {
    const double total = cumulative.back();
    const int64_t n = static_cast<int64_t>(out.size());
#pragma omp parallel for schedule(static)
    for (int64_t j = 0; j < n; ++j) {
        rng::Substream rs(stream_key, step, static_cast<uint64_t>(j));
        out[j] = pick_index(cumulative, rs.uniform() * total);
    }
}

void sample_systematic_serial(std::span<const double> cumulative, uint64_t stream_key,
                              uint32_t step, std::span<uint32_t> out) {
    const double total = cumulative.back();
    const double stride = total / static_cast<double>(out.size());
    rng::Substream rs(stream_key, step, 0);
    const double offset = rs.uniform() * stride;
    // The comb positions are increasing, so one merge scan suffices.
    size_t idx = 0;
    for (size_t j = 0; j < out.size(); ++j) {
        double pos = offset + stride * static_cast<double>(j);
        while (idx + 1 < cumulative.size() && cumulative[idx] <= pos) ++idx;
        out[j] = static_cast<uint32_t>(idx);
    }
}

void sample_systematic_omp(std::span<const double> cumulative, uint64_t stream_key,
                           uint32_t step, std::span<uint32_t> out) {
    const double total = cumulative.back();
    const double stride = total / static_cast<double>(out.size());
    rng::Substream rs(stream_key, step, 0);
    const double offset = rs.uniform() * stride;
    const int64_t n = static_cast<int64_t>(out.size());
#pragma omp parallel for schedule(static)
    for (int64_t j = 0; j < n; ++j)
        out[j] = pick_index(cumulative, offset + stride * static_cast<double>(j));
}

}  // namespace terratrack::kernels
