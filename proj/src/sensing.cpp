#include "terratrack/sensing.hpp"

namespace terratrack {

Report sample_report(const TargetState& true_state, const NoiseSpec& noise, int step,
                     rng::Substream& rs) {
    noise.require_valid("sample_report");
    Report r;
    r.step = step;
    r.noise = noise;
    r.observed.x = true_state.x + rs.normal(0.0, noise.sigma_x);
    r.observed.y = true_state.y + rs.normal(0.0, noise.sigma_y);
    r.observed.speed = std::max(0.0, true_state.speed + rs.normal(0.0, noise.sigma_speed));
    r.observed.heading =
        wrap_heading(true_state.heading + rs.normal(0.0, noise.sigma_heading));
    return r;
}

TargetState invert_observation(const Report& report, rng::Substream& rs) {
    report.noise.require_valid("invert_observation");
    TargetState s;
    s.x = report.observed.x - rs.normal(0.0, report.noise.sigma_x);
    s.y = report.observed.y - rs.normal(0.0, report.noise.sigma_y);
    s.speed = std::max(0.0, report.observed.speed - rs.normal(0.0, report.noise.sigma_speed));
    s.heading = wrap_heading(report.observed.heading -
                             rs.normal(0.0, report.noise.sigma_heading));
    return s;
}

TargetState birth_sample(const Report& report, double dt, const NoiseSpec& sigma_w,
                         rng::Substream& rs) {
    TargetState s = invert_observation(report, rs);
    kinematic_step(s, dt, sigma_w, rs);
    return s;
}

}  // namespace terratrack
