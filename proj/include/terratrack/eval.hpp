#pragma once

#include <map>
#include <optional>
#include <vector>

#include "terratrack/phd.hpp"
#include "terratrack/scenario.hpp"

// Tracking metrics: the expected-count trajectory against the true count, and
// per-vehicle position error measured as the Euclidean distance from the true
// position to the nearest detected peak (nearest neighbour, no assignment —
// one peak may serve several vehicles).

namespace terratrack {

struct StepMetrics {
    int step = 0;
    int n_true = 0;
    double n_hat = 0.0;
    std::map<int, std::optional<double>> errors;  // vehicle id -> meters, or absent
};

/// Nearest-peak distance for every true vehicle; absent when there are no peaks.
std::map<int, std::optional<double>> position_errors(
    const std::vector<TruthEntry>& truth_step, const std::vector<Peak>& peaks);

/// Same quantities under a one-to-one optimal assignment of peaks to vehicles
/// (vehicles beyond the peak count stay absent). Offered as a stricter
/// diagnostic; the nearest-peak metric above is the reference one.
std::map<int, std::optional<double>> assignment_errors(
    const std::vector<TruthEntry>& truth_step, const std::vector<Peak>& peaks);

/// Threshold and run length defining a lost track: a vehicle whose error
/// exceeds 300 m (or is absent) for 3 or more consecutive alive steps.
inline constexpr double kTrackLossDistance = 300.0;
inline constexpr int kTrackLossRun = 3;

struct Summary {
    int steps = 0;
    int error_samples = 0;              // alive vehicle-steps with a defined error
    double median_error = 0.0;          // over all error samples
    double p90_error = 0.0;
    double cardinality_ok_fraction = 0.0;  // steps with |round(n_hat) - n_true| <= 1
    int track_loss_count = 0;           // maximal loss runs summed over vehicles
};

Summary summarize(const std::vector<StepMetrics>& metrics);

}  // namespace terratrack
