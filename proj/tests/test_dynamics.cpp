#include <doctest.h>

#include <cmath>
#include <sstream>

#include "terratrack/dynamics.hpp"
#include "terratrack/rng.hpp"

using namespace terratrack;

namespace {

TerrainMap uniform_map(TerrainClass cls, double extent = 1e5) {
    TerrainMap map;
    map.width = 1;
    map.height = 1;
    map.cell_size = extent;
    map.origin_x = -extent / 2;
    map.origin_y = -extent / 2;
    map.cells = {cls};
    return map;
}

// One road cell (x in [0,10)) next to one forest cell (x in [10,20)).
TerrainMap road_forest_map() {
    TerrainMap map;
    map.width = 2;
    map.height = 1;
    map.cell_size = 10.0;
    map.origin_x = 0.0;
    map.origin_y = 0.0;
    map.cells = {TerrainClass::Road, TerrainClass::Forest};
    return map;
}

constexpr NoiseSpec kTinyNoise{1e-9, 1e-9, 1e-9, 1e-9};

}  // namespace

TEST_CASE("displacement follows speed and heading") {
    CHECK(displacement({0, 0, 0.0, 1.234}, 5.0).dx == 0.0);
    CHECK(displacement({0, 0, 0.0, 1.234}, 5.0).dy == 0.0);

    const auto east = displacement({0, 0, 8.3, 0.0}, 5.0);
    CHECK(east.dx == doctest::Approx(41.5).epsilon(1e-12));
    CHECK(east.dy == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    const auto north = displacement({0, 0, 2.0, kPi / 2}, 1.0);
    CHECK(north.dx == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(north.dy == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("propagate_cloud advances deterministically as noise vanishes") {
    const TerrainMap map = uniform_map(TerrainClass::Road);
    WeightedCloud cloud;
    cloud.states = {{0.0, 0.0, 8.3, 0.0}, {100.0, -50.0, 2.0, kPi / 2}};
    cloud.weights = {0.25, 0.75};
    cloud.mass = 1.0;

    WeightedCloud out = propagate_cloud(cloud, 5.0, kTinyNoise, map,
                                        rng::derive_stream(1, "dyn"), 0,
                                        TerrainMode::Reweight);
    CHECK(out.mass == cloud.mass);
    CHECK(out.states[0].x == doctest::Approx(41.5).epsilon(1e-6));
    CHECK(out.states[0].y == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    CHECK(out.states[1].x == doctest::Approx(100.0).epsilon(1e-6));
    CHECK(out.states[1].y == doctest::Approx(-40.0).epsilon(1e-6));
    // constant terrain class leaves relative weights unchanged
    CHECK(out.weights[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(out.weights[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("reweight mode applies the terrain ratio and conserves mass") {
    const TerrainMap map = road_forest_map();
    WeightedCloud cloud;
    cloud.states = {{5.0, 5.0, 0.0, 0.0}, {15.0, 5.0, 0.0, 0.0}};
    cloud.weights = {0.5, 0.5};
    cloud.mass = 1.0;

    WeightedCloud out =
        propagate_cloud(cloud, 1.0, kTinyNoise, map, rng::derive_stream(2, "dyn"), 0,
                        TerrainMode::Reweight);
    CHECK(out.mass == 1.0);
    CHECK(out.weight_sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.weights[0] / out.weights[1] == doctest::Approx(0.66 / 0.01).epsilon(1e-9));
}

TEST_CASE("resample mode keeps count and mass, and splits by terrain") {
    // Many particles straddling a road/field boundary: the road fraction
    // after terrain resampling concentrates near p_road / (p_road + p_field).
    TerrainMap map;
    map.width = 2;
    map.height = 1;
    map.cell_size = 1000.0;
    map.origin_x = -1000.0;
    map.origin_y = -500.0;
    map.cells = {TerrainClass::Road, TerrainClass::Field};

    const size_t n = 100000;
    WeightedCloud cloud;
    cloud.states.reserve(n);
    rng::Substream rs(rng::derive_stream(3, "dyn-straddle"), 0, 0);
    for (size_t i = 0; i < n; ++i) {
        // alternate sides of the boundary at x = 0
        const double x = (i % 2 == 0) ? -300.0 + 10.0 * rs.uniform() : 300.0;
        cloud.states.push_back({x, 0.0, 0.0, 0.0});
    }
    cloud.weights.assign(n, 1.0 / n);
    cloud.mass = 1.0;

    WeightedCloud out = propagate_cloud(cloud, 1.0, kTinyNoise, map,
                                        rng::derive_stream(4, "dyn"), 0,
                                        TerrainMode::Resample);
    CHECK(out.size() == n);
    CHECK(out.mass == 1.0);
    CHECK(out.weight_sum() == doctest::Approx(1.0).epsilon(1e-9));

    size_t on_road = 0;
    for (const auto& s : out.states) on_road += s.x < 0.0;
    const double expected = 0.66 / (0.66 + 0.33);
    const double se = std::sqrt(expected * (1.0 - expected) / n);
    CHECK(std::abs(static_cast<double>(on_road) / n - expected) < 3.0 * se);
}

TEST_CASE("raising the road preference never lowers the road fraction") {
    TerrainMap map = road_forest_map();
    WeightedCloud cloud;
    for (int i = 0; i < 64; ++i)
        cloud.states.push_back({i < 32 ? 5.0 : 15.0, 5.0, 0.0, 0.0});
    cloud.weights.assign(64, 1.0 / 64.0);
    cloud.mass = 1.0;

    double prev_fraction = -1.0;
    for (double p_road : {0.2, 0.4, 0.66, 0.9}) {
        map.p_t[0] = p_road;
        WeightedCloud out =
            propagate_cloud(cloud, 1.0, kTinyNoise, map, rng::derive_stream(5, "dyn"),
                            0, TerrainMode::Reweight);
        double road_mass = 0.0;
        for (size_t i = 0; i < out.size(); ++i)
            if (out.states[i].x < 10.0) road_mass += out.weights[i];
        CHECK(road_mass > prev_fraction);
        prev_fraction = road_mass;
    }
}

TEST_CASE("propagate_cloud error paths") {
    const TerrainMap map = uniform_map(TerrainClass::Road);
    WeightedCloud empty;
    CHECK_THROWS_AS(propagate_cloud(empty, 5.0, kTinyNoise, map, 1, 0),
                    std::invalid_argument);

    WeightedCloud cloud;
    cloud.states = {{0, 0, 0, 0}};
    cloud.weights = {1.0};
    cloud.mass = 1.0;
    NoiseSpec bad{0.0, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS(propagate_cloud(cloud, 5.0, bad, map, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(propagate_cloud(cloud, 0.0, kTinyNoise, map, 1, 0),
                    std::invalid_argument);

    // all weights zero: the terrain product vanishes
    WeightedCloud zero;
    zero.states = {{0, 0, 0, 0}, {1, 1, 0, 0}};
    zero.weights = {0.0, 0.0};
    zero.mass = 0.0;
    CHECK_THROWS_AS(propagate_cloud(zero, 5.0, kTinyNoise, map, 1, 0),
                    std::runtime_error);
}

TEST_CASE("serial and parallel execution agree exactly") {
    const TerrainMap map = road_forest_map();
    WeightedCloud cloud;
    rng::Substream rs(rng::derive_stream(11, "dyn-exec"), 0, 0);
    for (int i = 0; i < 999; ++i) {
        cloud.states.push_back({20.0 * rs.uniform() - 2.0, 8.0 * rs.uniform(),
                                10.0 * rs.uniform(), (rs.uniform() - 0.5) * kTwoPi});
        cloud.weights.push_back(rs.uniform());
    }
    cloud.mass = cloud.weight_sum();

    const NoiseSpec sigma{10.0, 10.0, 2.0, kPi / 4.0};
    for (TerrainMode mode : {TerrainMode::Reweight, TerrainMode::Resample}) {
        WeightedCloud a = propagate_cloud(cloud, 5.0, sigma, map,
                                          rng::derive_stream(12, "dyn"), 7, mode,
                                          Exec::Serial);
        WeightedCloud b = propagate_cloud(cloud, 5.0, sigma, map,
                                          rng::derive_stream(12, "dyn"), 7, mode,
                                          Exec::Parallel);
        CHECK(a.weights == b.weights);
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a.states[i].x == b.states[i].x);
            CHECK(a.states[i].y == b.states[i].y);
            CHECK(a.states[i].speed == b.states[i].speed);
            CHECK(a.states[i].heading == b.states[i].heading);
            // canonical state after propagation
            CHECK(a.states[i].speed >= 0.0);
            CHECK(a.states[i].heading >= -kPi);
            CHECK(a.states[i].heading < kPi);
        }
    }
}
