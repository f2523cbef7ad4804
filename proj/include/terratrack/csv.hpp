#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "terratrack/eval.hpp"
#include "terratrack/gmm.hpp"
#include "terratrack/phd.hpp"
#include "terratrack/scenario.hpp"

// CSV codecs for the file interfaces. Doubles are written in shortest
// round-trip form, so rereading a file reproduces the exact values and
// identical runs produce byte-identical files.

namespace terratrack {

// reports: step,obs_id,x,y,speed,heading,sx,sy,ss,sh
void write_reports(const std::vector<std::vector<Report>>& reports_by_step,
                   std::ostream& out);
std::vector<std::vector<Report>> read_reports(std::istream& in);

// ground truth: step,vehicle_id,x,y,speed,heading
void write_truth(const GroundTruth& truth, std::ostream& out);
GroundTruth read_truth(std::istream& in);

// tracks: step,n_hat,peak_idx,peak_x,peak_y,peak_mass
// A step without peaks writes one row with peak_idx=-1 and empty peak fields.
struct StepTrack {
    int step = 0;
    double n_hat = 0.0;
    std::vector<Peak> peaks;
};
void write_tracks(const std::vector<FilterOutput>& outputs, std::ostream& out);
std::vector<StepTrack> read_tracks(std::istream& in);

// metrics: step,n_true,n_hat,err_v0,... (empty field when the vehicle is
// absent that step or no peak exists)
void write_metrics(const std::vector<StepMetrics>& metrics, std::ostream& out);

// summary as key=value lines
void write_summary(const Summary& summary, std::ostream& out);

// per-step particle dump: step,x,y,speed,heading,weight
void write_particles(int step, const WeightedCloud& cloud, std::ostream& out,
                     bool header);

// mixture dump: step,comp,weight,mx,my,cxx,cxy,cyy
void write_mixture(int step, const GaussianMixture& mixture, std::ostream& out,
                   bool header);

// heat map: step,cell_x,cell_y,mass (sparse, row per populated cell)
void write_heatmap_step(int step, const WeightedCloud& cloud, const TerrainMap& map,
                        std::ostream& out, bool header);

}  // namespace terratrack
