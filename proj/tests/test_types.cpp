#include <doctest.h>

#include <cmath>

#include "terratrack/rng.hpp"
#include "terratrack/types.hpp"

using namespace terratrack;

TEST_CASE("wrap_heading maps into [-pi, pi)") {
    CHECK(wrap_heading(0.0) == 0.0);
    CHECK(wrap_heading(kPi) == -kPi);      // boundary goes to the lower bound
    CHECK(wrap_heading(-kPi) == -kPi);
    CHECK(wrap_heading(3.0 * kPi) == doctest::Approx(-kPi).epsilon(1e-15));
    CHECK(wrap_heading(kPi / 2) == doctest::Approx(kPi / 2));
    CHECK(wrap_heading(-3.5 * kPi) == doctest::Approx(0.5 * kPi));
}

TEST_CASE("wrap_heading rejects non-finite input") {
    CHECK_THROWS_AS(wrap_heading(std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
    CHECK_THROWS_AS(wrap_heading(std::numeric_limits<double>::quiet_NaN()),
                    std::invalid_argument);
}

TEST_CASE("wrap_heading is idempotent and 2pi-periodic") {
    rng::Substream rs(rng::derive_stream(7, "wrap-test"), 0, 0);
    for (int i = 0; i < 2000; ++i) {
        const double theta = (rs.uniform() - 0.5) * 200.0;
        const double w = wrap_heading(theta);
        CHECK(w >= -kPi);
        CHECK(w < kPi);
        CHECK(wrap_heading(w) == w);
        // residue equivalence mod 2pi
        const double k = std::round((theta - w) / kTwoPi);
        CHECK(theta - w == doctest::Approx(k * kTwoPi).epsilon(1e-9));
    }
}

TEST_CASE("birth_death_rates reproduces the closed form") {
    auto [pb, pd] = birth_death_rates(0.1, 0.01);
    CHECK(pb == doctest::Approx(0.015848931924611134).epsilon(1e-12));
    CHECK(pd == 0.01);

    auto [pb2, pd2] = birth_death_rates(0.9, 0.01);
    CHECK(pb2 == doctest::Approx(0.6309573444801932).epsilon(1e-12));
    CHECK(pd2 == 0.01);

    // exponent tends to 1 as p_fn tends to 0
    auto [pb3, pd3] = birth_death_rates(1e-12, 0.01);
    CHECK(pb3 == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(pd3 == 0.01);
}

TEST_CASE("birth_death_rates validates its domain") {
    CHECK_THROWS_AS(birth_death_rates(0.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(birth_death_rates(1.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(birth_death_rates(0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(birth_death_rates(0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(birth_death_rates(-0.1, 0.5), std::invalid_argument);
}

TEST_CASE("birth rate grows with the miss probability") {
    double prev = 0.0;
    for (double p_fn = 0.05; p_fn < 1.0; p_fn += 0.05) {
        auto [pb, pd] = birth_death_rates(p_fn, 0.01);
        CHECK(pb > prev);
        prev = pb;
    }
}

TEST_CASE("FilterParams keeps derived rates consistent") {
    FilterParams params;
    params.p_fn = 0.5;
    params.k_const = 0.01;
    CHECK(params.p_b() == doctest::Approx(std::pow(0.01, 0.5)).epsilon(1e-15));
    CHECK(params.p_d() == 0.01);
    params.require_valid();

    params.p_fn = 1.5;
    CHECK_THROWS_AS(params.require_valid(), std::invalid_argument);
}

TEST_CASE("NoiseSpec validation") {
    NoiseSpec good{1.0, 2.0, 0.5, 0.1};
    CHECK(good.valid());
    NoiseSpec bad{1.0, 0.0, 0.5, 0.1};
    CHECK(!bad.valid());
    CHECK_THROWS_AS(bad.require_valid("test"), std::invalid_argument);
}
