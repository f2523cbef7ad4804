#include "terratrack/phd.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <stdexcept>

#include "terratrack/kernels.hpp"
#include "terratrack/rng.hpp"

namespace terratrack {

namespace {
// Substream salts used within one filter step.
constexpr uint64_t kSurvivorSalt = 1;
constexpr uint64_t kResampleSalt = 2;
constexpr uint64_t kBirthSaltBase = 16;  // 2 salts per report: invert, propagate

double fixed_order_dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
}  // namespace

WeightUpdateResult update_weights(std::span<const double> prior_weights,
                                  const std::vector<std::vector<double>>& likelihoods,
                                  double prior_mass, double p_fn, Exec exec) {
    const size_t n = prior_weights.size();
    if (n == 0)
        throw std::invalid_argument("update_weights: empty prior");

    // factor[s] accumulates sum_i L_i[s] / C_i over the usable reports.
    std::vector<double> factor(n, 0.0);
    WeightUpdateResult result;
    int used = 0;
    for (size_t i = 0; i < likelihoods.size(); ++i) {
        const std::vector<double>& li = likelihoods[i];
        if (li.size() != n)
            throw std::invalid_argument("update_weights: likelihood block size mismatch");
        const double ci = fixed_order_dot(prior_weights, li);
        if (!(ci >= DBL_MIN)) {  // no particle supports this report
            result.skipped.push_back(static_cast<int>(i));
            continue;
        }
        ++used;
        const double inv_ci = 1.0 / ci;
        const int64_t nn = static_cast<int64_t>(n);
        if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
            for (int64_t s = 0; s < nn; ++s) factor[s] += li[s] * inv_ci;
        } else {
            for (int64_t s = 0; s < nn; ++s) factor[s] += li[s] * inv_ci;
        }
    }

    result.weights.resize(n);
    const int64_t nn = static_cast<int64_t>(n);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int64_t s = 0; s < nn; ++s)
            result.weights[s] = prior_weights[s] * (p_fn + factor[s]);
    } else {
        for (int64_t s = 0; s < nn; ++s)
            result.weights[s] = prior_weights[s] * (p_fn + factor[s]);
    }
    result.mass = static_cast<double>(used) + p_fn * prior_mass;
    return result;
}

std::vector<uint32_t> resample_indices(std::span<const double> weights, size_t count,
                                       uint64_t stream_key, uint32_t step,
                                       ResampleScheme scheme, Exec exec) {
    std::vector<double> cumulative(weights.size());
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0.0)
            throw std::invalid_argument("resample_indices: negative weight");
        acc += weights[i];
        cumulative[i] = acc;
    }
    if (!(acc > 0.0))
        throw std::invalid_argument("resample_indices: total weight must be > 0");

    std::vector<uint32_t> picks(count);
    if (scheme == ResampleScheme::Multinomial) {
        if (exec == Exec::Parallel)
            kernels::sample_multinomial_omp(cumulative, stream_key, step, picks);
        else
            kernels::sample_multinomial_serial(cumulative, stream_key, step, picks);
    } else {
        if (exec == Exec::Parallel)
            kernels::sample_systematic_omp(cumulative, stream_key, step, picks);
        else
            kernels::sample_systematic_serial(cumulative, stream_key, step, picks);
    }
    return picks;
}

size_t particle_count_for_mass(double mass, int n_per_unit) {
    if (!(mass > 0.0)) return 0;
    auto count = static_cast<long long>(
        std::llround(mass * static_cast<double>(n_per_unit)));
    if (count < 1 && mass > 1e-3) count = 1;
    return count < 0 ? 0 : static_cast<size_t>(count);
}

double cardinality_recursion(size_t n_reports_t, size_t n_reports_prev, double n_prev,
                             const FilterParams& params) {
    const double prior =
        params.p_b() * static_cast<double>(n_reports_prev) + (1.0 - params.p_d()) * n_prev;
    const double posterior = static_cast<double>(n_reports_t) + params.p_fn * prior;
    return std::min(posterior, params.max_count);
}

WeightedCloud predict(const PhdParticleSet& posterior_prev,
                      const std::vector<Report>& reports_prev,
                      const FilterParams& params, const TerrainMap& map,
                      uint64_t stream_key, TerrainMode mode, Exec exec) {
    params.require_valid();
    const int step = posterior_prev.step + 1;
    const double p_b = params.p_b();
    const double p_d = params.p_d();
    const size_t n_birth = static_cast<size_t>(params.n_per_unit);

    WeightedCloud prior;

    // Survivor block, mass (1 - p_d) * n_{t-1}^X.
    if (!posterior_prev.cloud.empty()) {
        WeightedCloud survivors = posterior_prev.cloud;
        for (double& w : survivors.weights) w *= (1.0 - p_d);
        survivors.mass = posterior_prev.cloud.mass * (1.0 - p_d);
        survivors = propagate_cloud(survivors, params.dt, params.sigma_w, map,
                                    rng::derive_substream(stream_key, kSurvivorSalt),
                                    static_cast<uint32_t>(step), mode, exec);
        prior.states = std::move(survivors.states);
        prior.weights = std::move(survivors.weights);
        prior.mass = survivors.mass;
    }
    prior.states.reserve(prior.states.size() + reports_prev.size() * n_birth);
    prior.weights.reserve(prior.weights.size() + reports_prev.size() * n_birth);

    // One birth cloud per report from step t-1, mass p_b each.
    for (size_t r = 0; r < reports_prev.size(); ++r) {
        const Report& rep = reports_prev[r];
        rep.noise.require_valid("predict.birth");
        const uint64_t invert_key =
            rng::derive_substream(stream_key, kBirthSaltBase + 2 * r);
        const uint64_t move_key =
            rng::derive_substream(stream_key, kBirthSaltBase + 2 * r + 1);

        WeightedCloud birth;
        birth.states.resize(n_birth);
        const int64_t nb = static_cast<int64_t>(n_birth);
        if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
            for (int64_t s = 0; s < nb; ++s) {
                rng::Substream rs(invert_key, static_cast<uint32_t>(step),
                                  static_cast<uint64_t>(s));
                birth.states[s] = invert_observation(rep, rs);
            }
        } else {
            for (int64_t s = 0; s < nb; ++s) {
                rng::Substream rs(invert_key, static_cast<uint32_t>(step),
                                  static_cast<uint64_t>(s));
                birth.states[s] = invert_observation(rep, rs);
            }
        }
        birth.weights.assign(n_birth, p_b / static_cast<double>(n_birth));
        birth.mass = p_b;
        birth = propagate_cloud(birth, params.dt, params.sigma_w, map, move_key,
                                static_cast<uint32_t>(step), mode, exec);

        prior.states.insert(prior.states.end(), birth.states.begin(), birth.states.end());
        prior.weights.insert(prior.weights.end(), birth.weights.begin(),
                             birth.weights.end());
        prior.mass += birth.mass;
    }
    return prior;
}

WeightedCloud update(const WeightedCloud& prior, const std::vector<Report>& reports,
                     const FilterParams& params, Exec exec, std::vector<int>* skipped) {
    if (prior.empty() || !(prior.mass > 0.0))
        throw std::invalid_argument("update: prior must be non-empty with positive mass");

    std::vector<std::vector<double>> blocks(reports.size());
    for (size_t i = 0; i < reports.size(); ++i) {
        blocks[i].resize(prior.size());
        kernels::likelihoods(reports[i], prior.states, blocks[i], exec);
    }
    WeightUpdateResult r =
        update_weights(prior.weights, blocks, prior.mass, params.p_fn, exec);
    if (skipped)
        skipped->insert(skipped->end(), r.skipped.begin(), r.skipped.end());

    WeightedCloud posterior;
    posterior.states = prior.states;
    posterior.weights = std::move(r.weights);
    posterior.mass = r.mass;
    return posterior;
}

double estimate_count(WeightedCloud& posterior, const FilterParams& params) {
    if (posterior.empty()) {
        posterior.mass = 0.0;
        return 0.0;
    }
    if (posterior.mass > params.max_count) {
        const double scale = params.max_count / posterior.mass;
        for (double& w : posterior.weights) w *= scale;
        posterior.mass = params.max_count;
    }
    return posterior.mass;
}

PhdParticleSet resample(const WeightedCloud& posterior, int n_per_unit,
                        uint64_t stream_key, uint32_t step, ResampleScheme scheme,
                        Exec exec) {
    for (double w : posterior.weights)
        if (w < 0.0)
            throw std::invalid_argument("resample: negative weight");

    PhdParticleSet out;
    out.step = static_cast<int>(step);
    const size_t count = particle_count_for_mass(posterior.mass, n_per_unit);
    if (count == 0) return out;  // extinction: drops any sub-rounding mass

    std::vector<uint32_t> picks =
        resample_indices(posterior.weights, count, stream_key, step, scheme, exec);
    out.cloud.states.resize(count);
    for (size_t j = 0; j < count; ++j) out.cloud.states[j] = posterior.states[picks[j]];
    out.cloud.weights.assign(count, posterior.mass / static_cast<double>(count));
    out.cloud.mass = posterior.mass;
    out.expected_count = posterior.mass;
    return out;
}

std::pair<PhdParticleSet, FilterOutput> filter_step(
    const PhdParticleSet& state, const std::vector<Report>& reports_prev,
    const std::vector<Report>& reports_t, const FilterParams& params,
    const TerrainMap& map, uint64_t stream_key, TerrainMode mode,
    ResampleScheme scheme, Exec exec) {
    const int step = state.step + 1;
    FilterOutput out;
    out.step = step;

    WeightedCloud posterior;
    WeightedCloud prior = predict(state, reports_prev, params, map, stream_key, mode, exec);
    if (prior.empty()) {
        // Cold start: no support yet, so no report can be absorbed this step.
        for (size_t i = 0; i < reports_t.size(); ++i)
            out.skipped_reports.push_back(static_cast<int>(i));
    } else {
        posterior = update(prior, reports_t, params, exec, &out.skipped_reports);
    }

    out.raw_mass = posterior.mass;
    out.expected_count = estimate_count(posterior, params);

    PhdParticleSet next = resample(posterior, params.n_per_unit,
                                   rng::derive_substream(stream_key, kResampleSalt),
                                   static_cast<uint32_t>(step), scheme, exec);
    next.step = step;
    return {std::move(next), std::move(out)};
}

}  // namespace terratrack
