#include "terratrack/bootstrap.hpp"

#include <cfloat>
#include <stdexcept>
#include <string>

#include "terratrack/kernels.hpp"
#include "terratrack/rng.hpp"

namespace terratrack {

namespace {
constexpr uint64_t kMoveSalt = 1;
constexpr uint64_t kDrawSalt = 2;
}  // namespace

WeightedCloud bootstrap_step(const WeightedCloud& cloud, const Report& report,
                             double dt, const NoiseSpec& sigma_w, const TerrainMap& map,
                             uint64_t stream_key, uint32_t step, TerrainMode mode,
                             ResampleScheme scheme, Exec exec) {
    if (cloud.empty())
        throw std::invalid_argument("bootstrap_step: empty cloud");

    WeightedCloud prior =
        propagate_cloud(cloud, dt, sigma_w, map,
                        rng::derive_substream(stream_key, kMoveSalt), step, mode, exec);

    std::vector<double> like(prior.size());
    kernels::likelihoods(report, prior.states, like, exec);
    double sum = 0.0;
    for (size_t i = 0; i < prior.size(); ++i) {
        prior.weights[i] *= like[i];
        sum += prior.weights[i];
    }
    if (sum < DBL_MIN)
        throw std::runtime_error(
            "bootstrap_step: no particle supports the report at step " +
            std::to_string(report.step) + " (all likelihoods are zero)");
    const double inv = 1.0 / sum;
    for (double& w : prior.weights) w *= inv;
    prior.mass = 1.0;

    const size_t n = prior.size();
    std::vector<uint32_t> picks =
        resample_indices(prior.weights, n, rng::derive_substream(stream_key, kDrawSalt),
                         step, scheme, exec);
    WeightedCloud posterior;
    posterior.states.resize(n);
    for (size_t j = 0; j < n; ++j) posterior.states[j] = prior.states[picks[j]];
    posterior.weights.assign(n, 1.0 / static_cast<double>(n));
    posterior.mass = 1.0;
    return posterior;
}

}  // namespace terratrack
