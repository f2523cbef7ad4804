#include "terratrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace terratrack {

namespace {

/// Nearest-rank quantile of an unsorted copy.
double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(v.size())));
    if (rank == 0) rank = 1;
    return v[rank - 1];
}

}  // namespace

std::map<int, std::optional<double>> position_errors(
    const std::vector<TruthEntry>& truth_step, const std::vector<Peak>& peaks) {
    std::map<int, std::optional<double>> errors;
    for (const TruthEntry& t : truth_step) {
        if (peaks.empty()) {
            errors[t.vehicle_id] = std::nullopt;
            continue;
        }
        double best = std::numeric_limits<double>::infinity();
        for (const Peak& p : peaks)
            best = std::min(best, std::hypot(t.state.x - p.x, t.state.y - p.y));
        errors[t.vehicle_id] = best;
    }
    return errors;
}

std::map<int, std::optional<double>> assignment_errors(
    const std::vector<TruthEntry>& truth_step, const std::vector<Peak>& peaks) {
    std::map<int, std::optional<double>> errors;
    for (const TruthEntry& t : truth_step) errors[t.vehicle_id] = std::nullopt;
    if (peaks.empty() || truth_step.empty()) return errors;

    const size_t nv = truth_step.size();
    const size_t np = peaks.size();

    // Small instance sizes: enumerate injective peak selections directly.
    std::vector<size_t> pick(np);
    std::iota(pick.begin(), pick.end(), 0);
    std::vector<size_t> best_pick;
    double best_cost = std::numeric_limits<double>::infinity();
    std::sort(pick.begin(), pick.end());
    do {
        double cost = 0.0;
        const size_t assigned = std::min(nv, np);
        for (size_t v = 0; v < assigned; ++v) {
            const Peak& p = peaks[pick[v]];
            cost += std::hypot(truth_step[v].state.x - p.x, truth_step[v].state.y - p.y);
        }
        if (cost < best_cost) {
            best_cost = cost;
            best_pick.assign(pick.begin(), pick.begin() + assigned);
        }
    } while (std::next_permutation(pick.begin(), pick.end()));

    for (size_t v = 0; v < best_pick.size(); ++v) {
        const Peak& p = peaks[best_pick[v]];
        errors[truth_step[v].vehicle_id] =
            std::hypot(truth_step[v].state.x - p.x, truth_step[v].state.y - p.y);
    }
    return errors;
}

Summary summarize(const std::vector<StepMetrics>& metrics) {
    if (metrics.empty())
        throw std::invalid_argument("summarize: need at least one step");

    Summary s;
    s.steps = static_cast<int>(metrics.size());

    std::vector<double> samples;
    int cardinality_ok = 0;
    for (const StepMetrics& m : metrics) {
        if (std::abs(static_cast<double>(std::llround(m.n_hat)) - m.n_true) <= 1.0)
            ++cardinality_ok;
        for (const auto& [id, err] : m.errors)
            if (err) samples.push_back(*err);
    }
    s.error_samples = static_cast<int>(samples.size());
    s.median_error = quantile(samples, 0.5);
    s.p90_error = quantile(samples, 0.9);
    s.cardinality_ok_fraction =
        static_cast<double>(cardinality_ok) / static_cast<double>(metrics.size());

    // Track losses: per vehicle, maximal runs of lost steps (error absent or
    // beyond the threshold) lasting at least kTrackLossRun alive steps.
    std::map<int, int> run_length;
    std::map<int, bool> counted;
    for (const StepMetrics& m : metrics) {
        for (const auto& [id, err] : m.errors) {
            const bool lost = !err || *err > kTrackLossDistance;
            if (lost) {
                if (++run_length[id] == kTrackLossRun && !counted[id]) {
                    ++s.track_loss_count;
                    counted[id] = true;
                }
            } else {
                run_length[id] = 0;
                counted[id] = false;
            }
        }
    }
    return s;
}

}  // namespace terratrack
