#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "terratrack/csv.hpp"
#include "terratrack/pipeline.hpp"
#include "terratrack/rng.hpp"
#include "terratrack/scenario.hpp"
#include "terratrack/terrain.hpp"
#include "terratrack/text.hpp"

namespace tt = terratrack;

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return in;
}

int cmd_genmap(const std::string& out_path, uint64_t seed, int width, int height,
               double cell) {
    tt::TerrainMap map = tt::genmap(width, height, cell, seed);
    tt::save_map_file(map, out_path);
    int road = 0, field = 0;
    for (auto c : map.cells) {
        road += c == tt::TerrainClass::Road;
        field += c == tt::TerrainClass::Field;
    }
    const double total = static_cast<double>(map.cells.size());
    std::cout << "wrote " << out_path << ": " << width << "x" << height << " cells of "
              << cell << " m (" << map.extent_x() / 1000.0 << " x "
              << map.extent_y() / 1000.0 << " km), road "
              << 100.0 * road / total << "%, field " << 100.0 * field / total << "%\n";
    return 0;
}

int cmd_simulate(const std::string& map_path, const std::string& scenario_path,
                 uint64_t seed, std::optional<double> p_fn_override,
                 const std::string& truth_path, const std::string& reports_path) {
    tt::Scenario scenario = tt::load_scenario_file(scenario_path);
    if (p_fn_override) scenario.p_fn = *p_fn_override;

    if (!map_path.empty()) {
        // The map is not needed to run the scripts; loading it validates that
        // the scenario stays inside the mapped area.
        tt::TerrainMap map = tt::load_map_file(map_path);
        for (const auto& v : scenario.vehicles)
            for (const auto& wp : v.waypoints)
                if (wp[0] < map.origin_x || wp[0] > map.origin_x + map.extent_x() ||
                    wp[1] < map.origin_y || wp[1] > map.origin_y + map.extent_y())
                    std::cerr << "warning: vehicle " << v.id << " waypoint ("
                              << wp[0] << ", " << wp[1] << ") lies outside the map\n";
    }

    tt::GroundTruth truth =
        tt::simulate(scenario, tt::rng::derive_stream(seed, "scenario"));
    auto reports = tt::generate_reports(truth, scenario.p_fn, scenario.sigma_r,
                                        tt::rng::derive_stream(seed, "reports"));

    auto tf = open_out(truth_path);
    tt::write_truth(truth, tf);
    auto rf = open_out(reports_path);
    tt::write_reports(reports, rf);

    size_t n_reports = 0;
    for (const auto& step : reports) n_reports += step.size();
    std::cout << "simulated " << scenario.steps << " steps, "
              << scenario.vehicles.size() << " vehicles, p_fn=" << scenario.p_fn
              << ", " << n_reports << " reports\n";
    return 0;
}

int cmd_track(const std::string& map_path, const std::string& reports_path,
              const tt::TrackConfig& config, const std::string& out_path,
              const std::string& particles_path, const std::string& heatmap_path,
              const std::string& mixture_path, const std::string& timing_path) {
    tt::TerrainMap map = tt::load_map_file(map_path);
    auto rf = open_in(reports_path);
    auto reports = tt::read_reports(rf);

    std::optional<std::ofstream> particles_out, heatmap_out, mixture_out;
    if (!particles_path.empty()) particles_out = open_out(particles_path);
    if (!heatmap_path.empty()) heatmap_out = open_out(heatmap_path);
    if (!mixture_path.empty()) mixture_out = open_out(mixture_path);

    tt::StepHook hook;
    bool particles_head = true, heatmap_head = true, mixture_head = true;
    if (particles_out || heatmap_out || mixture_out) {
        hook = [&](int step, const tt::PhdParticleSet& set,
                   const tt::GaussianMixture* mixture) {
            if (particles_out) {
                tt::write_particles(step, set.cloud, *particles_out, particles_head);
                particles_head = false;
            }
            if (heatmap_out) {
                tt::write_heatmap_step(step, set.cloud, map, *heatmap_out, heatmap_head);
                heatmap_head = false;
            }
            if (mixture_out && mixture) {
                tt::write_mixture(step, *mixture, *mixture_out, mixture_head);
                mixture_head = false;
            }
        };
    }

    tt::TrackResult result = tt::run_track(map, reports, config, hook);

    int skipped = 0, skipped_steps = 0;
    for (const auto& o : result.outputs) {
        skipped += static_cast<int>(o.skipped_reports.size());
        skipped_steps += !o.skipped_reports.empty();
    }
    if (skipped > 0)
        std::cerr << "note: " << skipped << " report(s) across " << skipped_steps
                  << " step(s) had no particle support and entered as births only\n";

    auto out = open_out(out_path);
    tt::write_tracks(result.outputs, out);

    if (!timing_path.empty()) {
        auto tf = open_out(timing_path);
        tf << "step,predict_ms,update_ms,resample_ms,gmm_ms\n";
        for (size_t i = 0; i < result.timings.size(); ++i) {
            const auto& t = result.timings[i];
            tf << i << ',' << tt::format_double(t.predict_ms) << ','
               << tt::format_double(t.update_ms) << ','
               << tt::format_double(t.resample_ms) << ','
               << tt::format_double(t.gmm_ms) << '\n';
        }
    }

    tt::StepTiming total;
    tt::StepTiming peak;
    for (const auto& t : result.timings) {
        total.predict_ms += t.predict_ms;
        total.update_ms += t.update_ms;
        total.resample_ms += t.resample_ms;
        total.gmm_ms += t.gmm_ms;
        peak.predict_ms = std::max(peak.predict_ms, t.predict_ms);
        peak.update_ms = std::max(peak.update_ms, t.update_ms);
        peak.resample_ms = std::max(peak.resample_ms, t.resample_ms);
        peak.gmm_ms = std::max(peak.gmm_ms, t.gmm_ms);
    }
    const double n = static_cast<double>(result.timings.size());
    const double filter_mean =
        (total.predict_ms + total.update_ms + total.resample_ms) / n;
    std::cout << "tracked " << result.timings.size() << " steps\n"
              << "per-iteration mean: predict " << total.predict_ms / n
              << " ms, update " << total.update_ms / n << " ms, resample "
              << total.resample_ms / n << " ms (filter " << filter_mean
              << " ms), gmm-fit " << total.gmm_ms / n << " ms\n"
              << "per-iteration max:  predict " << peak.predict_ms << " ms, update "
              << peak.update_ms << " ms, resample " << peak.resample_ms
              << " ms, gmm-fit " << peak.gmm_ms << " ms\n";
    return 0;
}

int cmd_eval(const std::string& truth_path, const std::string& tracks_path,
             const std::string& metrics_path, const std::string& summary_path,
             bool use_assignment) {
    auto tf = open_in(truth_path);
    tt::GroundTruth truth = tt::read_truth(tf);
    auto kf = open_in(tracks_path);
    auto tracks = tt::read_tracks(kf);

    std::vector<tt::StepTrack> by_step(static_cast<size_t>(truth.steps));
    for (auto& t : tracks) {
        const int step = t.step;
        if (step >= 0 && step < truth.steps)
            by_step[static_cast<size_t>(step)] = std::move(t);
    }

    std::vector<tt::StepMetrics> metrics;
    metrics.reserve(static_cast<size_t>(truth.steps));
    for (int step = 0; step < truth.steps; ++step) {
        const auto& truth_step = truth.at[static_cast<size_t>(step)];
        const auto& track = by_step[static_cast<size_t>(step)];
        tt::StepMetrics m;
        m.step = step;
        m.n_true = static_cast<int>(truth_step.size());
        m.n_hat = track.n_hat;
        m.errors = use_assignment ? tt::assignment_errors(truth_step, track.peaks)
                                  : tt::position_errors(truth_step, track.peaks);
        metrics.push_back(std::move(m));
    }

    auto mf = open_out(metrics_path);
    tt::write_metrics(metrics, mf);
    tt::Summary summary = tt::summarize(metrics);
    auto sf = open_out(summary_path);
    tt::write_summary(summary, sf);
    tt::write_summary(summary, std::cout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"terrain-aware multi-target tracking toolkit"};
    app.require_subcommand(1);

    // genmap
    auto* genmap = app.add_subcommand("genmap", "generate a synthetic terrain map");
    std::string gm_out;
    uint64_t gm_seed = 42;
    int gm_width = 200, gm_height = 200;
    double gm_cell = 25.0;
    genmap->add_option("--out", gm_out, "output map file")->required();
    genmap->add_option("--seed", gm_seed, "map seed");
    genmap->add_option("--width", gm_width, "cells east-west");
    genmap->add_option("--height", gm_height, "cells north-south");
    genmap->add_option("--cell", gm_cell, "cell size in meters");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "simulate ground truth and reports");
    std::string sim_map, sim_scenario, sim_truth, sim_reports;
    uint64_t sim_seed = 1;
    double sim_pfn = -1.0;
    simulate->add_option("--map", sim_map, "terrain map (used for sanity warnings)");
    simulate->add_option("--scenario", sim_scenario, "scenario file")->required();
    simulate->add_option("--seed", sim_seed, "simulation seed");
    simulate->add_option("--pfn", sim_pfn, "override the scenario's p_fn");
    simulate->add_option("--truth", sim_truth, "ground-truth CSV output")->required();
    simulate->add_option("--reports", sim_reports, "reports CSV output")->required();

    // track
    auto* track = app.add_subcommand("track", "run the tracker over a report file");
    std::string trk_map, trk_reports, trk_out;
    std::string trk_particles, trk_heatmap, trk_mixture, trk_timing;
    std::string trk_resample = "multinomial", trk_terrain = "resample",
                trk_filter = "phd";
    tt::TrackConfig config;
    int trk_threads = 0;
    track->add_option("--map", trk_map, "terrain map file")->required();
    track->add_option("--reports", trk_reports, "reports CSV")->required();
    track->add_option("--pfn", config.p_fn, "false-negative probability");
    track->add_option("--particles", config.n_per_unit, "particles per unit mass");
    track->add_option("--seed", config.seed, "filter seed");
    track->add_option("--out", trk_out, "track CSV output")->required();
    track->add_option("--steps", config.steps, "steps to run (default: last report)");
    track->add_option("--dt", config.dt, "seconds per step");
    track->add_option("--k", config.k_const, "death rate / birth-rate base");
    track->add_option("--max-count", config.max_count, "expected-count cap");
    track->add_option("--resample", trk_resample, "multinomial|systematic")
        ->check(CLI::IsMember({"multinomial", "systematic"}));
    track->add_option("--terrain-mode", trk_terrain, "resample|reweight")
        ->check(CLI::IsMember({"resample", "reweight"}));
    track->add_option("--filter", trk_filter, "phd|bootstrap")
        ->check(CLI::IsMember({"phd", "bootstrap"}));
    track->add_option("--threads", trk_threads, "OpenMP threads (0 = default)");
    track->add_flag("--serial", "run the serial reference kernels");
    track->add_option("--dump-particles", trk_particles,
                      "per-step particle CSV (default: <out>.particles.csv)")
        ->expected(0, 1);
    track->add_option("--heatmap", trk_heatmap, "per-step cell-mass CSV");
    track->add_option("--dump-mixture", trk_mixture, "per-step mixture CSV");
    track->add_option("--timing", trk_timing, "per-step timing CSV");

    // eval
    auto* eval = app.add_subcommand("eval", "score tracks against ground truth");
    std::string ev_truth, ev_tracks, ev_metrics, ev_summary;
    bool ev_assignment = false;
    eval->add_option("--truth", ev_truth, "ground-truth CSV")->required();
    eval->add_option("--tracks", ev_tracks, "track CSV")->required();
    eval->add_option("--out", ev_metrics, "metrics CSV output")->required();
    eval->add_option("--summary", ev_summary, "summary text output")->required();
    eval->add_flag("--assignment", ev_assignment,
                   "use optimal one-to-one assignment instead of nearest peak");

    CLI11_PARSE(app, argc, argv);

    try {
        if (genmap->parsed())
            return cmd_genmap(gm_out, gm_seed, gm_width, gm_height, gm_cell);
        if (simulate->parsed())
            return cmd_simulate(sim_map, sim_scenario, sim_seed,
                                sim_pfn >= 0.0 ? std::optional<double>(sim_pfn)
                                               : std::nullopt,
                                sim_truth, sim_reports);
        if (track->parsed()) {
            config.scheme = trk_resample == "systematic"
                                ? tt::ResampleScheme::Systematic
                                : tt::ResampleScheme::Multinomial;
            config.terrain_mode = trk_terrain == "reweight" ? tt::TerrainMode::Reweight
                                                            : tt::TerrainMode::Resample;
            config.filter = trk_filter == "bootstrap" ? tt::FilterKind::Bootstrap
                                                      : tt::FilterKind::Phd;
            if (track->count("--dump-particles") && trk_particles.empty())
                trk_particles = trk_out + ".particles.csv";
            if (track->count("--serial")) config.exec = tt::Exec::Serial;
#if defined(_OPENMP)
            if (trk_threads > 0) omp_set_num_threads(trk_threads);
#endif
            return cmd_track(trk_map, trk_reports, config, trk_out, trk_particles,
                             trk_heatmap, trk_mixture, trk_timing);
        }
        if (eval->parsed())
            return cmd_eval(ev_truth, ev_tracks, ev_metrics, ev_summary, ev_assignment);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
