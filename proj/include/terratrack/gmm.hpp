#pragma once

#include <cstdint>
#include <vector>

#include "terratrack/dynamics.hpp"
#include "terratrack/phd.hpp"

// Weighted EM over the particles' 2-D positions. Component means are the
// detected intensity maxima; speed and heading summaries come from a final
// hard assignment of particles to components.

namespace terratrack {

struct GmComponent {
    double weight = 0.0;   // mixture weight, components sum to 1
    double mean_x = 0.0;
    double mean_y = 0.0;
    double cov_xx = 1.0;   // eigenvalues floored at 1 m^2
    double cov_xy = 0.0;
    double cov_yy = 1.0;
    double mean_speed = 0.0;
    double mean_heading = 0.0;
};

struct GaussianMixture {
    std::vector<GmComponent> components;
};

/// Optional record of one fit, used by tests to check EM behaviour.
struct FitTrace {
    std::vector<double> log_likelihood;  // one entry per iteration
    int floored_iterations = 0;          // iterations where the eigenvalue floor bound
    int reinits = 0;
    int dropped_components = 0;
};

/// Weighted EM fit with k components. Initialization is a seeded
/// farthest-point scheme, so the fit is deterministic for a fixed stream key.
/// Degenerate components (weight < 1e-6) are reinitialized once, then dropped.
/// Throws if k < 1 or k exceeds the number of distinct particle positions.
GaussianMixture fit(const WeightedCloud& cloud, int k, uint64_t stream_key,
                    int max_iter = 50, double tol = 1e-6, FitTrace* trace = nullptr);

/// One peak per component: component mean with mass weight * expected_count,
/// sorted by descending mass.
std::vector<Peak> extract_peaks(const GaussianMixture& mixture, double expected_count);

/// Component count for a given expected count: round to the nearest integer
/// with a floor of one, or zero when the intensity is effectively empty.
int choose_k(double expected_count);

}  // namespace terratrack
