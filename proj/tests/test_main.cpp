#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "apte/csv.hpp"
#include "apte/parallel.hpp"
#include "apte/rng.hpp"

using namespace apte;

TEST_SUITE("util") {

TEST_CASE("rng is reproducible and stream derivation separates substreams") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(2, {2, 3}));
    CHECK(derive_seed(1, {2}) != derive_seed(1, {2, 0}));
}

TEST_CASE("uniform01 stays in [0,1) and is roughly uniform") {
    Rng rng(7);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("normal draws have the requested moments") {
    Rng rng(11);
    const int n = 50000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal(2.0, 3.0);
        sum += z;
        sumsq += z * z;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(mean == doctest::Approx(2.0).epsilon(0.03));
    CHECK(var == doctest::Approx(9.0).epsilon(0.05));
}

TEST_CASE("uniform_int covers its range without bias") {
    Rng rng(13);
    std::vector<int> counts(5, 0);
    for (int i = 0; i < 25000; ++i) ++counts[static_cast<std::size_t>(rng.uniform_int(5))];
    for (int c : counts) CHECK(std::abs(c - 5000) < 400);
}

TEST_CASE("shuffle permutes without losing elements") {
    Rng rng(17);
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    auto w = v;
    rng.shuffle(w);
    CHECK(w != v);  // 50! permutations; identity is effectively impossible
    std::sort(w.begin(), w.end());
    CHECK(w == v);
}

TEST_CASE("csv fixed formatting is locale-free and padded") {
    CHECK(csv::format(0.1425, 3) == "0.142");  // snprintf half-even on the binary value
    CHECK(csv::format(-0.5, 3) == "-0.500");
    CHECK(csv::format(2.0, 0) == "2");
}

TEST_CASE("csv full formatting round-trips doubles through text") {
    for (double v : {0.1, 1.0 / 3.0, -123.456e-7, 6.0 / 7.0, 0.0, 1e17}) {
        const std::string s = csv::format_full(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(csv::format_full(0.5) == "0.5");
    CHECK(csv::format_full(80.0) == "80");
}

TEST_CASE("csv split handles empty cells and trailing commas") {
    const auto cells = csv::split_line("a, b,,d,");
    REQUIRE(cells.size() == 5);
    CHECK(cells[0] == "a");
    CHECK(cells[1] == "b");
    CHECK(cells[2] == "");
    CHECK(cells[3] == "d");
    CHECK(cells[4] == "");
}

TEST_CASE("parallel_for result does not depend on thread count") {
    const std::size_t n = 1000;
    std::vector<double> one(n), four(n);
    parallel_for(n, 1, [&](std::size_t i) { one[i] = std::sqrt(static_cast<double>(i)); });
    parallel_for(n, 4, [&](std::size_t i) { four[i] = std::sqrt(static_cast<double>(i)); });
    CHECK(one == four);
}

TEST_CASE("parallel_for propagates worker exceptions") {
    CHECK_THROWS_AS(parallel_for(8, 3,
                                 [](std::size_t i) {
                                     if (i == 5) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}

} // TEST_SUITE
