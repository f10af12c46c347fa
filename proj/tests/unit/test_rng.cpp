#include <doctest.h>

#include <cmath>

#include "owc/rng.hpp"

using namespace owc;

TEST_CASE("splitmix64 matches the reference stream") {
    std::uint64_t state = 0;
    CHECK(splitmix64(state) == 0xe220a8397b1dcdafULL);
    CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("xoshiro256** seeded through splitmix64 matches the reference") {
    Rng rng(42);
    CHECK(rng.next_u64() == 0x15780b2e0c2ec716ULL);
    CHECK(rng.next_u64() == 0x6104d9866d113a7eULL);
    CHECK(rng.next_u64() == 0xae17533239e499a1ULL);
}

TEST_CASE("uniform draws stay in range") {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK((u >= 0.0 && u < 1.0));
        const auto k = rng.uniform_int(-3, 3);
        CHECK((k >= -3 && k <= 3));
    }
    CHECK_THROWS(rng.uniform_int(2, 1));
}

TEST_CASE("normal variates have unit variance") {
    Rng rng(11);
    const int n = 200000;
    double s = 0.0;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s += z;
        ss += z * z;
    }
    const double mean = s / n;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(ss / n - mean * mean - 1.0) < 0.02);
}

TEST_CASE("equal seeds give equal streams") {
    Rng a(123);
    Rng b(123);
    Rng c(124);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs |= x != c.next_u64();
    }
    CHECK(differs);
}
