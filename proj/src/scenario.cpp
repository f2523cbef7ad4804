#include "terratrack/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "terratrack/errors.hpp"
#include "terratrack/rng.hpp"
#include "terratrack/sensing.hpp"
#include "terratrack/text.hpp"

namespace terratrack {

namespace {

/// Walks a waypoint polyline by distance, skipping zero-length segments.
class PolylineWalker {
public:
    explicit PolylineWalker(const std::vector<std::array<double, 2>>& wp) : wp_(wp) {
        skip_degenerate();
    }

    bool done() const { return seg_ + 1 >= wp_.size(); }

    std::array<double, 2> position() const {
        if (done()) return wp_.back();
        const double len = segment_length();
        const double t = pos_ / len;
        return {wp_[seg_][0] + t * (wp_[seg_ + 1][0] - wp_[seg_][0]),
                wp_[seg_][1] + t * (wp_[seg_ + 1][1] - wp_[seg_][1])};
    }

    double heading() const {
        size_t s = done() ? last_segment() : seg_;
        return std::atan2(wp_[s + 1][1] - wp_[s][1], wp_[s + 1][0] - wp_[s][0]);
    }

    void advance(double dist) {
        while (dist > 0.0 && !done()) {
            const double remaining = segment_length() - pos_;
            if (dist < remaining) {
                pos_ += dist;
                return;
            }
            dist -= remaining;
            ++seg_;
            pos_ = 0.0;
            skip_degenerate();
        }
    }

private:
    double segment_length() const {
        const double dx = wp_[seg_ + 1][0] - wp_[seg_][0];
        const double dy = wp_[seg_ + 1][1] - wp_[seg_][1];
        return std::hypot(dx, dy);
    }

    size_t last_segment() const {
        size_t s = wp_.size() - 2;
        while (s > 0 && wp_[s] == wp_[s + 1]) --s;
        return s;
    }

    void skip_degenerate() {
        while (!done() && wp_[seg_] == wp_[seg_ + 1]) ++seg_;
    }

    const std::vector<std::array<double, 2>>& wp_;
    size_t seg_ = 0;
    double pos_ = 0.0;
};

constexpr uint64_t kDetectSalt = 1;
constexpr uint64_t kObserveSalt = 2;
constexpr uint64_t kShuffleSalt = 3;
constexpr uint64_t kCellSalt = 1;
constexpr uint64_t kPatchSalt = 2;

}  // namespace

GroundTruth simulate(const Scenario& scenario, uint64_t stream_key) {
    if (scenario.vehicles.empty())
        throw std::invalid_argument("simulate: no vehicle scripts");
    if (!(scenario.dt > 0.0))
        throw std::invalid_argument("simulate: dt must be > 0");
    for (const auto& v : scenario.vehicles) {
        if (v.appear_step >= v.disappear_step)
            throw std::invalid_argument("simulate: vehicle " + std::to_string(v.id) +
                                        " must appear before it disappears");
        if (v.waypoints.size() < 2)
            throw std::invalid_argument("simulate: vehicle " + std::to_string(v.id) +
                                        " needs at least 2 waypoints");
    }

    GroundTruth truth;
    truth.steps = scenario.steps;
    truth.at.assign(static_cast<size_t>(scenario.steps), {});

    for (const auto& v : scenario.vehicles) {
        PolylineWalker walker(v.waypoints);
        const int first = std::max(0, v.appear_step);
        const int last = std::min(scenario.steps, v.disappear_step);
        for (int step = first; step < last; ++step) {
            TargetState s;
            const auto pos = walker.position();
            s.x = pos[0];
            s.y = pos[1];
            s.heading = walker.heading();
            if (walker.done()) {
                s.speed = 0.0;  // parked at the final waypoint
            } else {
                rng::Substream rs(stream_key, static_cast<uint32_t>(step),
                                  static_cast<uint64_t>(v.id));
                s.speed = std::max(0.0, rs.normal(v.mean_speed, v.speed_std));
                walker.advance(s.speed * scenario.dt);
            }
            truth.at[static_cast<size_t>(step)].push_back({v.id, s});
        }
    }
    return truth;
}

std::vector<std::vector<Report>> generate_reports(const GroundTruth& truth, double p_fn,
                                                  const NoiseSpec& noise,
                                                  uint64_t stream_key) {
    if (!(p_fn >= 0.0 && p_fn < 1.0))
        throw std::invalid_argument("generate_reports: p_fn must be in [0,1)");
    noise.require_valid("generate_reports");

    const uint64_t detect_key = rng::derive_substream(stream_key, kDetectSalt);
    const uint64_t observe_key = rng::derive_substream(stream_key, kObserveSalt);
    const uint64_t shuffle_key = rng::derive_substream(stream_key, kShuffleSalt);

    std::vector<std::vector<Report>> reports(truth.at.size());
    for (size_t step = 0; step < truth.at.size(); ++step) {
        auto& out = reports[step];
        for (const TruthEntry& entry : truth.at[step]) {
            rng::Substream det(detect_key, static_cast<uint32_t>(step),
                               static_cast<uint64_t>(entry.vehicle_id));
            if (det.uniform() >= 1.0 - p_fn) continue;
            rng::Substream obs(observe_key, static_cast<uint32_t>(step),
                               static_cast<uint64_t>(entry.vehicle_id));
            out.push_back(sample_report(entry.state, noise, static_cast<int>(step), obs));
        }
        if (out.size() > 1) {
            rng::Substream shuf(shuffle_key, static_cast<uint32_t>(step), 0);
            for (size_t i = out.size() - 1; i > 0; --i)
                std::swap(out[i], out[shuf.uniform_below(i + 1)]);
        }
    }
    return reports;
}

TerrainMap genmap(int width, int height, double cell_size, uint64_t seed) {
    if (width <= 0 || height <= 0 || !(cell_size > 0.0))
        throw std::invalid_argument("genmap: dimensions must be positive");

    TerrainMap map;
    map.width = width;
    map.height = height;
    map.cell_size = cell_size;
    map.origin_x = 0.0;
    map.origin_y = 0.0;
    map.cells.resize(static_cast<size_t>(width) * height);

    const double ex = map.extent_x();
    const double ey = map.extent_y();
    const double min_ext = std::min(ex, ey);
    const double cx = ex / 2.0;
    const double cy = ey / 2.0;
    const double ring_r = 0.30 * min_ext;
    const double road_halfwidth =
        std::max(1.5, 0.008 * std::min(width, height)) * cell_size;
    const double field_margin =
        std::max(12.0, 0.06 * std::min(width, height)) * cell_size;

    const uint64_t map_key = rng::derive_stream(seed, "genmap");
    const uint64_t cell_key = rng::derive_substream(map_key, kCellSalt);
    const uint64_t patch_key = rng::derive_substream(map_key, kPatchSalt);

    // Seeded elliptical field patches in the backland.
    struct Patch {
        double x, y, rx, ry;
    };
    std::vector<Patch> patches;
    {
        rng::Substream ps(patch_key, 0, 0);
        const size_t n_patches = 4 + ps.uniform_below(4);
        for (size_t p = 0; p < n_patches; ++p) {
            Patch patch;
            patch.x = ps.uniform() * ex;
            patch.y = ps.uniform() * ey;
            patch.rx = (0.03 + 0.07 * ps.uniform()) * min_ext;
            patch.ry = (0.03 + 0.07 * ps.uniform()) * min_ext;
            patches.push_back(patch);
        }
    }

    for (int j = 0; j < height; ++j) {
        for (int i = 0; i < width; ++i) {
            const double x = (i + 0.5) * cell_size;
            const double y = (j + 0.5) * cell_size;
            const double d_ring = std::abs(std::hypot(x - cx, y - cy) - ring_r);
            const double d_road =
                std::min({std::abs(y - cy), std::abs(x - cx), d_ring});
            if (d_road <= road_halfwidth) {
                map.at(i, j) = TerrainClass::Road;
                continue;
            }
            rng::Substream cs(cell_key, static_cast<uint32_t>(j),
                              static_cast<uint64_t>(i));
            const double jitter = 0.75 + 0.5 * cs.uniform();
            if (d_road <= field_margin * jitter) {
                map.at(i, j) = TerrainClass::Field;
                continue;
            }
            bool in_patch = false;
            for (const Patch& p : patches) {
                const double ux = (x - p.x) / p.rx;
                const double uy = (y - p.y) / p.ry;
                if (ux * ux + uy * uy <= 1.0) {
                    in_patch = true;
                    break;
                }
            }
            map.at(i, j) = in_patch ? TerrainClass::Field : TerrainClass::Forest;
        }
    }
    return map;
}

Scenario default_scenario() {
    Scenario sc;  // dt 5, 169 steps, p_fn 0.1, sigma_r {50, 50, 1, pi/8}

    // Map extent 5 km x 5 km (genmap 200x200 at 25 m): roads cross at
    // (2500, 2500) with a ring of radius 1500 around the center.
    VehicleScript solid;
    solid.id = 0;
    solid.appear_step = 0;
    solid.disappear_step = 140;
    solid.waypoints = {{200.0, 2500.0},       {4000.0, 2500.0},
                       {3948.89, 2888.23},    {3799.04, 3250.0},
                       {3560.66, 3560.66},    {3250.0, 3799.04},
                       {2888.23, 3948.89},    {2500.0, 4000.0}};

    // Leaves the north-south road for a ~500 m cut across the field at the
    // central crossing, then rejoins the east-west road.
    VehicleScript dashed;
    dashed.id = 1;
    dashed.appear_step = 0;
    dashed.disappear_step = 137;
    dashed.waypoints = {{2500.0, 4900.0}, {2500.0, 2900.0}, {2900.0, 2500.0},
                        {4900.0, 2500.0}};

    VehicleScript dotted;
    dotted.id = 2;
    dotted.appear_step = 20;
    dotted.disappear_step = 169;
    dotted.waypoints = {{2500.0, 1000.0},    {2888.23, 1051.11}, {3250.0, 1200.96},
                        {3560.66, 1439.34},  {3799.04, 1750.0},  {3948.89, 2111.77},
                        {4000.0, 2500.0},    {3948.89, 2888.23}, {3799.04, 3250.0},
                        {3560.66, 3560.66},  {3250.0, 3799.04},  {2888.23, 3948.89},
                        {2500.0, 4000.0},    {2111.77, 3948.89}, {1750.0, 3799.04},
                        {1439.34, 3560.66},  {1200.96, 3250.0}};

    sc.vehicles = {solid, dashed, dotted};
    return sc;
}

Scenario load_scenario(std::istream& in) {
    Scenario sc;
    sc.vehicles.clear();
    VehicleScript* current = nullptr;
    std::string raw;
    int line_no = 0;
    bool saw_sigma = false;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;

        if (line.substr(0, 7) == "vehicle") {
            std::string_view rest = trim(line.substr(7));
            if (!rest.empty() && rest.front() == '=') rest = trim(rest.substr(1));
            try {
                sc.vehicles.emplace_back();
                sc.vehicles.back().id = static_cast<int>(parse_int(rest));
            } catch (const std::exception& e) {
                throw ParseError(line_no, std::string("vehicle header: ") + e.what());
            }
            current = &sc.vehicles.back();
            continue;
        }

        const size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(line_no, "expected key=value, got '" + std::string(line) + "'");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));

        try {
            if (key == "dt") {
                sc.dt = parse_double(value);
            } else if (key == "steps") {
                sc.steps = static_cast<int>(parse_int(value));
            } else if (key == "p_fn") {
                sc.p_fn = parse_double(value);
            } else if (key == "sigma_r") {
                std::istringstream vs{std::string(value)};
                std::string a, b, c, d;
                if (!(vs >> a >> b >> c >> d))
                    throw std::invalid_argument("sigma_r needs 4 values");
                sc.sigma_r = {parse_double(a), parse_double(b), parse_double(c),
                              parse_double(d)};
                saw_sigma = true;
            } else if (key == "appear" && current) {
                current->appear_step = static_cast<int>(parse_int(value));
            } else if (key == "disappear" && current) {
                current->disappear_step = static_cast<int>(parse_int(value));
            } else if (key == "speed_mean" && current) {
                current->mean_speed = parse_double(value);
            } else if (key == "speed_std" && current) {
                current->speed_std = parse_double(value);
            } else if (key == "waypoints" && current) {
                current->waypoints.clear();
                std::string_view rest = value;
                while (!rest.empty()) {
                    const size_t semi = rest.find(';');
                    std::string_view pair = trim(rest.substr(0, semi));
                    rest = semi == std::string_view::npos ? std::string_view{}
                                                          : rest.substr(semi + 1);
                    if (pair.empty()) continue;
                    const size_t comma = pair.find(',');
                    if (comma == std::string_view::npos)
                        throw std::invalid_argument("waypoint needs x,y");
                    current->waypoints.push_back({parse_double(trim(pair.substr(0, comma))),
                                                  parse_double(trim(pair.substr(comma + 1)))});
                }
            } else {
                throw std::invalid_argument("unknown key '" + std::string(key) + "'" +
                                            (current ? "" : " outside a vehicle block"));
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(line_no, e.what());
        }
    }

    if (!(sc.dt > 0.0)) throw ParseError(line_no, "scenario needs dt > 0");
    if (sc.steps <= 0) throw ParseError(line_no, "scenario needs steps > 0");
    if (!(sc.p_fn >= 0.0 && sc.p_fn < 1.0))
        throw ParseError(line_no, "scenario needs p_fn in [0,1)");
    if (saw_sigma) sc.sigma_r.require_valid("scenario sigma_r");
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    return load_scenario(in);
}

void save_scenario(const Scenario& sc, std::ostream& out) {
    out << "dt=" << format_double(sc.dt) << '\n';
    out << "steps=" << sc.steps << '\n';
    out << "p_fn=" << format_double(sc.p_fn) << '\n';
    out << "sigma_r=" << format_double(sc.sigma_r.sigma_x) << ' '
        << format_double(sc.sigma_r.sigma_y) << ' '
        << format_double(sc.sigma_r.sigma_speed) << ' '
        << format_double(sc.sigma_r.sigma_heading) << '\n';
    for (const auto& v : sc.vehicles) {
        out << "vehicle " << v.id << '\n';
        out << "appear=" << v.appear_step << '\n';
        out << "disappear=" << v.disappear_step << '\n';
        out << "speed_mean=" << format_double(v.mean_speed) << '\n';
        out << "speed_std=" << format_double(v.speed_std) << '\n';
        out << "waypoints=";
        for (size_t i = 0; i < v.waypoints.size(); ++i) {
            if (i) out << ';';
            out << format_double(v.waypoints[i][0]) << ','
                << format_double(v.waypoints[i][1]);
        }
        out << '\n';
    }
}

void save_scenario_file(const Scenario& sc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open scenario file for writing: " + path);
    save_scenario(sc, out);
}

}  // namespace terratrack
