#include "terratrack/dynamics.hpp"

#include <cfloat>
#include <stdexcept>

#include "terratrack/kernels.hpp"

namespace terratrack {

namespace {
// Salts for the substreams a single propagation consumes.
constexpr uint64_t kMoveSalt = 1;
constexpr uint64_t kResampleSalt = 2;
}  // namespace

WeightedCloud propagate_cloud(const WeightedCloud& cloud, double dt,
                              const NoiseSpec& sigma_w, const TerrainMap& map,
                              uint64_t stream_key, uint32_t step, TerrainMode mode,
                              Exec exec) {
    if (cloud.empty())
        throw std::invalid_argument("propagate_cloud: empty cloud");
    sigma_w.require_valid("propagate_cloud.sigma_w");
    if (!(dt > 0.0))
        throw std::invalid_argument("propagate_cloud: dt must be > 0");

    const size_t n = cloud.size();
    WeightedCloud out;
    out.states = cloud.states;
    kernels::propagate(out.states, dt, sigma_w,
                       rng::derive_substream(stream_key, kMoveSalt), step, exec);

    std::vector<double> terrain(n);
    kernels::terrain_weights(out.states, map, terrain, exec);

    if (mode == TerrainMode::Reweight) {
        out.weights.resize(n);
        for (size_t i = 0; i < n; ++i) out.weights[i] = cloud.weights[i] * terrain[i];
        double sum = 0.0;
        for (double w : out.weights) sum += w;
        if (sum < DBL_MIN)
            throw std::runtime_error("propagate_cloud: zero total terrain weight");
        const double scale = cloud.mass / sum;
        for (double& w : out.weights) w *= scale;
        out.mass = cloud.mass;
        return out;
    }

    // Resample: redraw the same particle count in proportion to w * p_t.
    std::vector<double> cumulative(n);
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        acc += cloud.weights[i] * terrain[i];
        cumulative[i] = acc;
    }
    if (acc < DBL_MIN)
        throw std::runtime_error("propagate_cloud: zero total terrain weight");

    std::vector<uint32_t> picks(n);
    const uint64_t rk = rng::derive_substream(stream_key, kResampleSalt);
    if (exec == Exec::Parallel)
        kernels::sample_multinomial_omp(cumulative, rk, step, picks);
    else
        kernels::sample_multinomial_serial(cumulative, rk, step, picks);

    WeightedCloud resampled;
    resampled.states.resize(n);
    for (size_t i = 0; i < n; ++i) resampled.states[i] = out.states[picks[i]];
    resampled.weights.assign(n, cloud.mass / static_cast<double>(n));
    resampled.mass = cloud.mass;
    return resampled;
}

}  // namespace terratrack
