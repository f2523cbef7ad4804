#include "terratrack/csv.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>

#include "terratrack/errors.hpp"
#include "terratrack/text.hpp"

namespace terratrack {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    size_t start = 0;
    while (true) {
        const size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

void expect_header(std::istream& in, const std::string& expected, int& line_no) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(1, "missing header, expected '" + expected + "'");
    ++line_no;
    if (std::string(trim(line)) != expected)
        throw ParseError(line_no, "bad header, expected '" + expected + "'");
}

}  // namespace

void write_reports(const std::vector<std::vector<Report>>& reports_by_step,
                   std::ostream& out) {
    out << "step,obs_id,x,y,speed,heading,sx,sy,ss,sh\n";
    for (size_t step = 0; step < reports_by_step.size(); ++step) {
        for (size_t i = 0; i < reports_by_step[step].size(); ++i) {
            const Report& r = reports_by_step[step][i];
            out << step << ',' << i << ',' << format_double(r.observed.x) << ','
                << format_double(r.observed.y) << ','
                << format_double(r.observed.speed) << ','
                << format_double(r.observed.heading) << ','
                << format_double(r.noise.sigma_x) << ','
                << format_double(r.noise.sigma_y) << ','
                << format_double(r.noise.sigma_speed) << ','
                << format_double(r.noise.sigma_heading) << '\n';
        }
    }
}

std::vector<std::vector<Report>> read_reports(std::istream& in) {
    int line_no = 0;
    expect_header(in, "step,obs_id,x,y,speed,heading,sx,sy,ss,sh", line_no);
    std::vector<std::vector<Report>> reports;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 10)
            throw ParseError(line_no, "expected 10 fields, got " +
                                          std::to_string(f.size()));
        try {
            Report r;
            r.step = static_cast<int>(parse_int(f[0]));
            r.observed.x = parse_double(f[2]);
            r.observed.y = parse_double(f[3]);
            r.observed.speed = parse_double(f[4]);
            r.observed.heading = parse_double(f[5]);
            r.noise = {parse_double(f[6]), parse_double(f[7]), parse_double(f[8]),
                       parse_double(f[9])};
            if (r.step < 0) throw std::invalid_argument("negative step");
            r.noise.require_valid("report noise");
            if (reports.size() <= static_cast<size_t>(r.step))
                reports.resize(static_cast<size_t>(r.step) + 1);
            reports[static_cast<size_t>(r.step)].push_back(r);
        } catch (const std::exception& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return reports;
}

void write_truth(const GroundTruth& truth, std::ostream& out) {
    out << "step,vehicle_id,x,y,speed,heading\n";
    for (size_t step = 0; step < truth.at.size(); ++step) {
        for (const TruthEntry& e : truth.at[step]) {
            out << step << ',' << e.vehicle_id << ',' << format_double(e.state.x) << ','
                << format_double(e.state.y) << ',' << format_double(e.state.speed)
                << ',' << format_double(e.state.heading) << '\n';
        }
    }
}

GroundTruth read_truth(std::istream& in) {
    int line_no = 0;
    expect_header(in, "step,vehicle_id,x,y,speed,heading", line_no);
    GroundTruth truth;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 6)
            throw ParseError(line_no, "expected 6 fields, got " + std::to_string(f.size()));
        try {
            const int step = static_cast<int>(parse_int(f[0]));
            if (step < 0) throw std::invalid_argument("negative step");
            TruthEntry e;
            e.vehicle_id = static_cast<int>(parse_int(f[1]));
            e.state.x = parse_double(f[2]);
            e.state.y = parse_double(f[3]);
            e.state.speed = parse_double(f[4]);
            e.state.heading = parse_double(f[5]);
            if (truth.at.size() <= static_cast<size_t>(step))
                truth.at.resize(static_cast<size_t>(step) + 1);
            truth.at[static_cast<size_t>(step)].push_back(e);
        } catch (const std::exception& e) {
            throw ParseError(line_no, e.what());
        }
    }
    truth.steps = static_cast<int>(truth.at.size());
    return truth;
}

void write_tracks(const std::vector<FilterOutput>& outputs, std::ostream& out) {
    out << "step,n_hat,peak_idx,peak_x,peak_y,peak_mass\n";
    for (const FilterOutput& o : outputs) {
        if (o.peaks.empty()) {
            out << o.step << ',' << format_double(o.expected_count) << ",-1,,,\n";
            continue;
        }
        for (size_t i = 0; i < o.peaks.size(); ++i) {
            out << o.step << ',' << format_double(o.expected_count) << ',' << i << ','
                << format_double(o.peaks[i].x) << ',' << format_double(o.peaks[i].y)
                << ',' << format_double(o.peaks[i].mass) << '\n';
        }
    }
}

std::vector<StepTrack> read_tracks(std::istream& in) {
    int line_no = 0;
    expect_header(in, "step,n_hat,peak_idx,peak_x,peak_y,peak_mass", line_no);
    std::map<int, StepTrack> by_step;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 6)
            throw ParseError(line_no, "expected 6 fields, got " + std::to_string(f.size()));
        try {
            const int step = static_cast<int>(parse_int(f[0]));
            StepTrack& t = by_step[step];
            t.step = step;
            t.n_hat = parse_double(f[1]);
            const int peak_idx = static_cast<int>(parse_int(f[2]));
            if (peak_idx >= 0)
                t.peaks.push_back(
                    {parse_double(f[3]), parse_double(f[4]), parse_double(f[5])});
        } catch (const std::exception& e) {
            throw ParseError(line_no, e.what());
        }
    }
    std::vector<StepTrack> tracks;
    tracks.reserve(by_step.size());
    for (auto& [step, t] : by_step) tracks.push_back(std::move(t));
    return tracks;
}

void write_metrics(const std::vector<StepMetrics>& metrics, std::ostream& out) {
    int max_id = -1;
    for (const StepMetrics& m : metrics)
        for (const auto& [id, err] : m.errors) max_id = std::max(max_id, id);

    out << "step,n_true,n_hat";
    for (int id = 0; id <= max_id; ++id) out << ",err_v" << id;
    out << '\n';
    for (const StepMetrics& m : metrics) {
        out << m.step << ',' << m.n_true << ',' << format_double(m.n_hat);
        for (int id = 0; id <= max_id; ++id) {
            out << ',';
            auto it = m.errors.find(id);
            if (it != m.errors.end() && it->second) out << format_double(*it->second);
        }
        out << '\n';
    }
}

void write_summary(const Summary& s, std::ostream& out) {
    out << "steps=" << s.steps << '\n'
        << "error_samples=" << s.error_samples << '\n'
        << "median_error=" << format_double(s.median_error) << '\n'
        << "p90_error=" << format_double(s.p90_error) << '\n'
        << "cardinality_ok_fraction=" << format_double(s.cardinality_ok_fraction) << '\n'
        << "track_loss_count=" << s.track_loss_count << '\n';
}

void write_particles(int step, const WeightedCloud& cloud, std::ostream& out,
                     bool header) {
    if (header) out << "step,x,y,speed,heading,weight\n";
    for (size_t i = 0; i < cloud.size(); ++i) {
        const TargetState& s = cloud.states[i];
        out << step << ',' << format_double(s.x) << ',' << format_double(s.y) << ','
            << format_double(s.speed) << ',' << format_double(s.heading) << ','
            << format_double(cloud.weights[i]) << '\n';
    }
}

void write_mixture(int step, const GaussianMixture& mixture, std::ostream& out,
                   bool header) {
    if (header) out << "step,comp,weight,mx,my,cxx,cxy,cyy\n";
    for (size_t c = 0; c < mixture.components.size(); ++c) {
        const GmComponent& g = mixture.components[c];
        out << step << ',' << c << ',' << format_double(g.weight) << ','
            << format_double(g.mean_x) << ',' << format_double(g.mean_y) << ','
            << format_double(g.cov_xx) << ',' << format_double(g.cov_xy) << ','
            << format_double(g.cov_yy) << '\n';
    }
}

void write_heatmap_step(int step, const WeightedCloud& cloud, const TerrainMap& map,
                        std::ostream& out, bool header) {
    if (header) out << "step,cell_x,cell_y,mass\n";
    std::map<std::pair<int, int>, double> mass;
    for (size_t i = 0; i < cloud.size(); ++i) {
        const double fx = std::floor((cloud.states[i].x - map.origin_x) / map.cell_size);
        const double fy = std::floor((cloud.states[i].y - map.origin_y) / map.cell_size);
        if (!(fx >= 0 && fy >= 0 && fx < map.width && fy < map.height)) continue;
        mass[{static_cast<int>(fx), static_cast<int>(fy)}] += cloud.weights[i];
    }
    for (const auto& [cell, m] : mass)
        out << step << ',' << cell.first << ',' << cell.second << ','
            << format_double(m) << '\n';
}

}  // namespace terratrack
