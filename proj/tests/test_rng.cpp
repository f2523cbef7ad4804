#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "terratrack/rng.hpp"

using namespace terratrack;
using namespace terratrack::rng;

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Reference vectors from the Random123 distribution.
    auto r0 = philox4x32({0, 0}, {0, 0, 0, 0});
    CHECK(r0[0] == 0x6627e8d5u);
    CHECK(r0[1] == 0xe169c58du);
    CHECK(r0[2] == 0xbc57ac4cu);
    CHECK(r0[3] == 0x9b00dbd8u);

    auto r1 = philox4x32({0xffffffffu, 0xffffffffu},
                         {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu});
    CHECK(r1[0] == 0x408f276du);
    CHECK(r1[1] == 0x41c83b0eu);
    CHECK(r1[2] == 0xa20bc7c6u);
    CHECK(r1[3] == 0x6d5451fdu);

    auto r2 = philox4x32({0xa4093822u, 0x299f31d0u},
                         {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u});
    CHECK(r2[0] == 0xd16cfe09u);
    CHECK(r2[1] == 0x94fdccebu);
    CHECK(r2[2] == 0x5001e420u);
    CHECK(r2[3] == 0x24126ea1u);
}

TEST_CASE("substreams are reproducible and order-free") {
    const uint64_t key = derive_stream(123, "test");
    Substream a(key, 7, 42);
    Substream b(key, 7, 42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    // Drawing from another substream first must not change anything.
    Substream noisemaker(key, 7, 41);
    (void)noisemaker.next_u64();
    Substream c(key, 7, 42);
    Substream d(key, 7, 42);
    (void)d.uniform();
    CHECK(c.next_u64() == Substream(key, 7, 42).next_u64());
}

TEST_CASE("distinct labels and salts give distinct streams") {
    std::set<uint64_t> keys;
    keys.insert(derive_stream(1, "scenario"));
    keys.insert(derive_stream(1, "reports"));
    keys.insert(derive_stream(1, "filter"));
    keys.insert(derive_stream(1, "gmm"));
    keys.insert(derive_stream(2, "scenario"));
    CHECK(keys.size() == 5);

    const uint64_t base = derive_stream(1, "filter");
    std::set<uint64_t> subs;
    for (uint64_t salt = 0; salt < 1000; ++salt)
        subs.insert(derive_substream(base, salt));
    CHECK(subs.size() == 1000);
}

TEST_CASE("neighbouring substreams do not share outputs") {
    const uint64_t key = derive_stream(9, "independence");
    std::set<uint64_t> seen;
    for (uint64_t idx = 0; idx < 100; ++idx) {
        Substream rs(key, 3, idx);
        for (int d = 0; d < 4; ++d) seen.insert(rs.next_u64());
    }
    CHECK(seen.size() == 400);
}

TEST_CASE("uniform stays in [0,1) with the right moments") {
    Substream rs(derive_stream(5, "uniform"), 0, 0);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rs.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("normal draws have standard moments") {
    Substream rs(derive_stream(6, "normal"), 0, 0);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rs.normal();
        sum += z;
        sum2 += z * z;
        sum4 += z * z * z * z;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(0.02));
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(sum4 / n == doctest::Approx(3.0).epsilon(0.05));  // Gaussian kurtosis
}

TEST_CASE("uniform_below is unbiased over small ranges") {
    Substream rs(derive_stream(8, "below"), 0, 0);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) ++counts[rs.uniform_below(7)];
    for (int c : counts) CHECK(c == doctest::Approx(n / 7.0).epsilon(0.05));
}
