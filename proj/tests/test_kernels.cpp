#include <doctest.h>

#include <vector>

#include "terratrack/kernels.hpp"
#include "terratrack/rng.hpp"
#include "terratrack/scenario.hpp"

using namespace terratrack;

namespace {

std::vector<TargetState> random_states(size_t n, uint64_t seed) {
    rng::Substream rs(rng::derive_stream(seed, "kernel-states"), 0, 0);
    std::vector<TargetState> states(n);
    for (auto& s : states) {
        s.x = rs.uniform() * 5000.0;
        s.y = rs.uniform() * 5000.0;
        s.speed = rs.uniform() * 15.0;
        s.heading = (rs.uniform() - 0.5) * kTwoPi;
    }
    return states;
}

}  // namespace

TEST_CASE("parallel kernels match the serial reference bit for bit") {
    const TerrainMap map = genmap(100, 100, 25.0, 3);
    const NoiseSpec sigma{10.0, 10.0, 2.0, kPi / 4.0};
    const uint64_t key = rng::derive_stream(17, "kernel-equality");

    for (size_t n : {1u, 7u, 1000u, 4099u}) {
        std::vector<TargetState> serial = random_states(n, n);
        std::vector<TargetState> parallel = serial;

        kernels::propagate_serial(serial, 5.0, sigma, key, 3);
        kernels::propagate_omp(parallel, 5.0, sigma, key, 3);
        for (size_t i = 0; i < n; ++i) {
            CHECK(serial[i].x == parallel[i].x);
            CHECK(serial[i].y == parallel[i].y);
            CHECK(serial[i].speed == parallel[i].speed);
            CHECK(serial[i].heading == parallel[i].heading);
        }

        std::vector<double> tw_serial(n), tw_parallel(n);
        kernels::terrain_weights_serial(serial, map, tw_serial);
        kernels::terrain_weights_omp(serial, map, tw_parallel);
        CHECK(tw_serial == tw_parallel);

        Report report;
        report.step = 3;
        report.observed = serial[n / 2];
        report.noise = {50.0, 50.0, 1.0, kPi / 8.0};
        std::vector<double> like_serial(n), like_parallel(n);
        kernels::likelihoods_serial(report, serial, like_serial);
        kernels::likelihoods_omp(report, serial, like_parallel);
        CHECK(like_serial == like_parallel);

        std::vector<double> cumulative(n);
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) cumulative[i] = (acc += tw_serial[i]);
        std::vector<uint32_t> pick_serial(2 * n), pick_parallel(2 * n);
        kernels::sample_multinomial_serial(cumulative, key, 3, pick_serial);
        kernels::sample_multinomial_omp(cumulative, key, 3, pick_parallel);
        CHECK(pick_serial == pick_parallel);

        kernels::sample_systematic_serial(cumulative, key, 3, pick_serial);
        kernels::sample_systematic_omp(cumulative, key, 3, pick_parallel);
        CHECK(pick_serial == pick_parallel);
    }
}

TEST_CASE("multinomial draws never select zero-weight particles") {
    std::vector<double> weights = {0.0, 1.0, 0.0, 2.0, 0.0};
    std::vector<double> cumulative(weights.size());
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) cumulative[i] = (acc += weights[i]);

    std::vector<uint32_t> picks(5000);
    kernels::sample_multinomial_serial(cumulative, rng::derive_stream(4, "zero"), 0,
                                       picks);
    int ones = 0;
    for (uint32_t p : picks) {
        const bool valid = p == 1 || p == 3;
        CHECK(valid);
        ones += p == 1;
    }
    // two-thirds of the mass sits on index 3
    CHECK(ones == doctest::Approx(5000.0 / 3.0).epsilon(0.1));
}

TEST_CASE("systematic draws reproduce exact counts for equal weights") {
    std::vector<double> cumulative = {0.5, 1.0};
    std::vector<uint32_t> picks(4);
    kernels::sample_systematic_serial(cumulative, rng::derive_stream(5, "sys"), 0,
                                      picks);
    int first = 0;
    for (uint32_t p : picks) first += p == 0;
    CHECK(first == 2);  // exactly proportional under the comb
}
