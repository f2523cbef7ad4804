#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace terratrack {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Kinematic state of one ground vehicle: east/north position in meters,
/// speed in m/s and heading in radians (counter-clockwise from east).
struct TargetState {
    double x = 0.0;
    double y = 0.0;
    double speed = 0.0;
    double heading = 0.0;
};

/// Wraps an angle to the canonical range [-pi, pi); pi maps to -pi.
inline double wrap_heading(double theta) {
    if (!std::isfinite(theta))
        throw std::invalid_argument("wrap_heading: non-finite angle");
    double r = std::remainder(theta, kTwoPi);
    if (r >= kPi) r -= kTwoPi;
    return r;
}

/// Per-component standard deviations over the state space.
/// All components must be strictly positive.
struct NoiseSpec {
    double sigma_x = 0.0;
    double sigma_y = 0.0;
    double sigma_speed = 0.0;
    double sigma_heading = 0.0;

    bool valid() const {
        return std::isfinite(sigma_x) && sigma_x > 0.0 &&
               std::isfinite(sigma_y) && sigma_y > 0.0 &&
               std::isfinite(sigma_speed) && sigma_speed > 0.0 &&
               std::isfinite(sigma_heading) && sigma_heading > 0.0;
    }

    void require_valid(const char* what) const {
        if (!valid())
            throw std::invalid_argument(std::string(what) +
                                        ": noise components must be finite and > 0");
    }
};

/// One human-observer report: a noisy copy of a vehicle state together with
/// the standard deviations the observer states for it.
struct Report {
    int step = 0;
    TargetState observed;
    NoiseSpec noise;
};

/// Birth and death rates from the false-negative probability and the base
/// constant K: p_b = K^(1 - p_fn), p_d = K. A higher miss rate raises the
/// birth rate because confirming a birth takes more steps on average.
inline std::pair<double, double> birth_death_rates(double p_fn, double k_const) {
    if (!(p_fn > 0.0 && p_fn < 1.0))
        throw std::invalid_argument("birth_death_rates: p_fn must be in (0,1)");
    if (!(k_const > 0.0 && k_const < 1.0))
        throw std::invalid_argument("birth_death_rates: k_const must be in (0,1)");
    return {std::pow(k_const, 1.0 - p_fn), k_const};
}

/// Tuning knobs of the multi-target filter. The birth/death rates are
/// derived quantities and are always recomputed from p_fn and k_const.
struct FilterParams {
    int n_per_unit = 1000;        // particles per unit of expected-count mass
    double p_fn = 0.1;            // probability a present target goes unreported
    double k_const = 0.01;        // death rate and base of the birth rate
    NoiseSpec sigma_w{10.0, 10.0, 2.0, kPi / 4.0};
    double max_count = 5.0;       // cap on the expected target count
    double dt = 5.0;              // seconds per step

    double p_b() const { return birth_death_rates(p_fn, k_const).first; }
    double p_d() const { return k_const; }

    void require_valid() const {
        if (!(p_fn > 0.0 && p_fn < 1.0))
            throw std::invalid_argument("FilterParams: p_fn must be in (0,1)");
        if (!(k_const > 0.0 && k_const < 1.0))
            throw std::invalid_argument("FilterParams: k_const must be in (0,1)");
        if (n_per_unit < 1)
            throw std::invalid_argument("FilterParams: n_per_unit must be >= 1");
        if (!(max_count > 0.0))
            throw std::invalid_argument("FilterParams: max_count must be > 0");
        if (!(dt > 0.0))
            throw std::invalid_argument("FilterParams: dt must be > 0");
        sigma_w.require_valid("FilterParams.sigma_w");
    }
};

}  // namespace terratrack
