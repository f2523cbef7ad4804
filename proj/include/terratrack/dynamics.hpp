#pragma once

#include <cstdint>
#include <vector>

#include "terratrack/rng.hpp"
#include "terratrack/terrain.hpp"
#include "terratrack/types.hpp"

namespace terratrack {

/// Weighted particle cloud. `mass` tracks the sum of weights; operations that
/// conserve mass set it exactly rather than re-summing, so the stored value
/// is the authoritative one and the sum agrees with it to rounding error.
struct WeightedCloud {
    std::vector<TargetState> states;
    std::vector<double> weights;
    double mass = 0.0;

    size_t size() const { return states.size(); }
    bool empty() const { return states.empty(); }

    /// Fixed-order sum of weights, independent of thread count.
    double weight_sum() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

struct Displacement {
    double dx = 0.0;
    double dy = 0.0;
};

/// Straight-line movement implied by the state's speed and heading over dt.
inline Displacement displacement(const TargetState& s, double dt) {
    return {s.speed * dt * std::cos(s.heading), s.speed * dt * std::sin(s.heading)};
}

/// One kinematic propagation step: displacement plus independent Gaussian
/// noise on every component. Heading is wrapped, speed clamped at zero.
/// Draw order is fixed (x, y, speed, heading) so results are reproducible.
inline void kinematic_step(TargetState& s, double dt, const NoiseSpec& sigma_w,
                           rng::Substream& rs) {
    Displacement d = displacement(s, dt);
    s.x += d.dx + rs.normal(0.0, sigma_w.sigma_x);
    s.y += d.dy + rs.normal(0.0, sigma_w.sigma_y);
    s.speed = std::max(0.0, s.speed + rs.normal(0.0, sigma_w.sigma_speed));
    s.heading = wrap_heading(s.heading + rs.normal(0.0, sigma_w.sigma_heading));
}

/// How the terrain preference enters the motion model.
/// Resample redraws the particles in proportion to weight * p_t (the sampled
/// product-distribution form); Reweight folds p_t into the weights and then
/// rescales so the cloud keeps its mass. Both conserve total mass exactly and
/// agree in expectation; Resample equalizes weights, Reweight keeps support.
enum class TerrainMode { Resample, Reweight };

enum class Exec { Serial, Parallel };

/// Moves every particle by one motion step and applies the terrain factor at
/// cloud level. Randomness comes from substreams keyed by (stream_key, step,
/// particle index), so output is identical for any thread count.
/// Throws on an empty cloud and when every particle has zero terrain weight.
WeightedCloud propagate_cloud(const WeightedCloud& cloud, double dt,
                              const NoiseSpec& sigma_w, const TerrainMap& map,
                              uint64_t stream_key, uint32_t step,
                              TerrainMode mode = TerrainMode::Resample,
                              Exec exec = Exec::Parallel);

}  // namespace terratrack
