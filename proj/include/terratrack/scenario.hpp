#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "terratrack/terrain.hpp"
#include "terratrack/types.hpp"

// Ground-truth simulation: scripted vehicles follow waypoint polylines with
// normally distributed per-step speeds, and human observers report each alive
// vehicle with probability 1 - p_fn. Everything is a pure function of the
// scripts and a stream key.

namespace terratrack {

struct VehicleScript {
    int id = 0;
    int appear_step = 0;
    int disappear_step = 0;  // alive in [appear_step, disappear_step)
    std::vector<std::array<double, 2>> waypoints;
    double mean_speed = 8.3;
    double speed_std = 0.1;
};

struct Scenario {
    double dt = 5.0;
    int steps = 169;
    double p_fn = 0.1;
    NoiseSpec sigma_r{50.0, 50.0, 1.0, kPi / 8.0};
    std::vector<VehicleScript> vehicles;
};

struct TruthEntry {
    int vehicle_id = 0;
    TargetState state;
};

struct GroundTruth {
    int steps = 0;
    std::vector<std::vector<TruthEntry>> at;  // one list of alive vehicles per step
};

/// Runs the scripts. A vehicle appears at its first waypoint, advances along
/// the polyline by speed * dt per step (speed drawn from N(mean, std), clamped
/// at zero, heading following the segment tangent), and holds position at the
/// final waypoint with speed zero until it disappears.
GroundTruth simulate(const Scenario& scenario, uint64_t stream_key);

/// Observer reports: each alive vehicle reports independently with
/// probability 1 - p_fn; no false alarms. Report order within a step is
/// shuffled since reports carry no identity.
std::vector<std::vector<Report>> generate_reports(const GroundTruth& truth,
                                                  double p_fn, const NoiseSpec& noise,
                                                  uint64_t stream_key);

/// Synthetic terrain: two roads crossing mid-map plus a ring road, fields in
/// a jittered margin along the roads and in a few seeded patches, forest
/// elsewhere. Road placement depends only on the dimensions, so scripted
/// routes stay valid for every seed.
TerrainMap genmap(int width, int height, double cell_size, uint64_t seed);

/// The bundled three-vehicle scenario on the default 200x200x25 map: two
/// vehicles from the start (one leaves its road for a ~500 m field cut), a
/// third appearing mid-run, with staggered disappearances near the end.
Scenario default_scenario();

/// Line-oriented key=value scenario format:
///   dt=5  steps=169  p_fn=0.1  sigma_r=<4 values>
/// then per vehicle:
///   vehicle <id>, appear=, disappear=, speed_mean=, speed_std=,
///   waypoints=x,y;x,y;...
Scenario load_scenario(std::istream& in);
Scenario load_scenario_file(const std::string& path);
void save_scenario(const Scenario& scenario, std::ostream& out);
void save_scenario_file(const Scenario& scenario, const std::string& path);

}  // namespace terratrack
