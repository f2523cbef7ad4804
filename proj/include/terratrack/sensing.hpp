#pragma once

#include <cmath>
#include <cstdint>

#include "terratrack/dynamics.hpp"
#include "terratrack/rng.hpp"
#include "terratrack/types.hpp"

// Observation model: reports are the true state plus independent Gaussian
// noise per component, so the model is invertible and births can be seeded
// directly from observations.

namespace terratrack {

/// Precomputed Gaussian likelihood for one report's noise levels.
/// The heading residual is wrapped before the quadratic form, which for the
/// scenario noise levels is indistinguishable from a wrapped normal.
struct LikelihoodModel {
    double half_inv_xx, half_inv_yy, half_inv_ss, half_inv_hh;
    double norm;

    explicit LikelihoodModel(const NoiseSpec& n)
        : half_inv_xx(0.5 / (n.sigma_x * n.sigma_x)),
          half_inv_yy(0.5 / (n.sigma_y * n.sigma_y)),
          half_inv_ss(0.5 / (n.sigma_speed * n.sigma_speed)),
          half_inv_hh(0.5 / (n.sigma_heading * n.sigma_heading)),
          norm(1.0 / (kTwoPi * kTwoPi * n.sigma_x * n.sigma_y * n.sigma_speed *
                      n.sigma_heading)) {}

    double operator()(const TargetState& observed, const TargetState& state) const {
        double dx = observed.x - state.x;
        double dy = observed.y - state.y;
        double ds = observed.speed - state.speed;
        double dh = wrap_heading(observed.heading - state.heading);
        return norm * std::exp(-(dx * dx * half_inv_xx + dy * dy * half_inv_yy +
                                 ds * ds * half_inv_ss + dh * dh * half_inv_hh));
    }
};

/// Density of the report given a candidate state.
inline double likelihood(const Report& report, const TargetState& state) {
    report.noise.require_valid("likelihood");
    return LikelihoodModel(report.noise)(report.observed, state);
}

/// Draws a noisy observer report of the true state. The report carries the
/// generating noise as its stated uncertainty.
Report sample_report(const TargetState& true_state, const NoiseSpec& noise, int step,
                     rng::Substream& rs);

/// Draws a state consistent with the report: since the observation is
/// additive, the inverse is observed minus a noise draw at the stated sigmas.
TargetState invert_observation(const Report& report, rng::Substream& rs);

/// One draw from the observation-driven birth density: invert the report,
/// then apply one motion step. The terrain factor is applied at cloud level
/// by the caller, so no map is involved here.
TargetState birth_sample(const Report& report, double dt, const NoiseSpec& sigma_w,
                         rng::Substream& rs);

}  // namespace terratrack
