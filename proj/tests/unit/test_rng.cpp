#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "htwk/rng.hpp"

using namespace htwk;

// Reference outputs from numpy.random.Philox, which advances the counter
// before producing a block.
TEST_CASE("philox block matches numpy reference, zero key") {
    auto b = philox4x64({1, 0, 0, 0}, {0, 0});
    CHECK(b[0] == 0x02f4ba6408e4d89bULL);
    CHECK(b[1] == 0x3dd62b0b9ca8c5b2ULL);
    CHECK(b[2] == 0x1c8667a55d902e79ULL);
    CHECK(b[3] == 0x907d7a052fd5b4dcULL);
}

TEST_CASE("philox block matches numpy reference, nonzero key") {
    auto b6 = philox4x64({6, 0, 0, 0}, {0x1234, 0x5678});
    auto b7 = philox4x64({7, 0, 0, 0}, {0x1234, 0x5678});
    CHECK(b6[0] == 0x09dba83abcdd72b1ULL);
    CHECK(b6[1] == 0x6bfea1b8a191a243ULL);
    CHECK(b6[2] == 0x2a03645b1119235fULL);
    CHECK(b6[3] == 0x1833b326a6a7f0c5ULL);
    CHECK(b7[0] == 0xbb48c7abd759f6c8ULL);
    CHECK(b7[1] == 0x4f98313779478f69ULL);
    CHECK(b7[2] == 0x12fd075ac87007ccULL);
    CHECK(b7[3] == 0xeb58e2b552d5f2d8ULL);
}

TEST_CASE("stream is keyed by seed and index") {
    RngStream a(5, 3);
    auto first = philox4x64({0, 0, 0, 0}, {5, 3});
    for (int i = 0; i < 4; ++i) CHECK(a.next_u64() == first[i]);
    CHECK(a.counter() == 1);
    auto second = philox4x64({1, 0, 0, 0}, {5, 3});
    CHECK(a.next_u64() == second[0]);

    RngStream b(5, 3), c(5, 4), d(6, 3);
    const auto vb = b.next_u64();
    CHECK(vb == first[0]);
    CHECK(c.next_u64() != vb);
    CHECK(d.next_u64() != vb);
}

TEST_CASE("uniforms lie in the open unit interval") {
    RngStream r(1, 1);
    double sum = 0.0, sumsq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double u = r.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sumsq += u * u;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(var - 1.0 / 12.0) < 1e-3);
}

TEST_CASE("extreme words map strictly inside (0, 1)") {
    CHECK(RngStream::to_open_unit(0) == 0x1.0p-53);
    CHECK(RngStream::to_open_unit(~0ULL) < 1.0);
    CHECK(RngStream::to_open_unit(~0ULL) == 1.0 - 0x1.0p-53);
}

TEST_CASE("many streams give distinct leading words") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(RngStream(42, s).next_u64());
    CHECK(seen.size() == 1000);
}
