#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include <cogarch/rng.hpp>

using namespace cogarch;

TEST_CASE("splitmix64 streams are deterministic in the seed") {
    SplitMix64 a(42), b(42), c(43);
    bool all_equal = true;
    bool any_differ = false;
    for (int i = 0; i < 64; ++i) {
        const std::uint64_t xa = a.next();
        all_equal = all_equal && (xa == b.next());
        any_differ = any_differ || (xa != c.next());
    }
    REQUIRE(all_equal);
    REQUIRE(any_differ);
}

TEST_CASE("derived streams are distinct and order-free") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_stream(7, i));
    REQUIRE(seen.size() == 1000);
    REQUIRE(derive_stream(7, 3) == derive_stream(7, 3));
    REQUIRE(derive_stream(7, 3) != derive_stream(8, 3));
}

TEST_CASE("uniform01 stays in [0, 1) and uniform_pos in (0, 1]") {
    SplitMix64 gen(1);
    bool in_range = true;
    for (int i = 0; i < 10000; ++i) {
        const double u = gen.uniform01();
        const double p = gen.uniform_pos();
        in_range = in_range && u >= 0.0 && u < 1.0 && p > 0.0 && p <= 1.0;
    }
    REQUIRE(in_range);
}

TEST_CASE("normal and exponential moments match at Monte-Carlo accuracy") {
    SplitMix64 gen(123);
    const int n = 200000;
    double sn = 0.0, sn2 = 0.0, se = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = gen.normal();
        sn += z;
        sn2 += z * z;
        se += gen.exponential(1.0);
    }
    const double inv = 1.0 / n;
    // 5 sigma bands
    REQUIRE(std::abs(sn * inv) < 5.0 / std::sqrt(double(n)));
    REQUIRE(std::abs(sn2 * inv - 1.0) < 5.0 * std::sqrt(2.0 / n));
    REQUIRE(std::abs(se * inv - 1.0) < 5.0 / std::sqrt(double(n)));
}
