#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ftl/atomize.hpp"
#include "ftl/metrics.hpp"

using namespace ftl;

namespace {

/// Independent CDF-inversion oracle: bisection on the sup-definition
/// sup{ x : integral_{prev}^{x} rho < ell }.
double bisect_next(const PiecewiseConstantDensity& d, double prev, double ell, double hi) {
    double lo = prev;
    double hi_b = hi;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi_b);
        if (d.integrate(prev, mid) < ell)
            lo = mid;
        else
            hi_b = mid;
    }
    return 0.5 * (lo + hi_b);
}

PiecewiseConstantDensity random_blocks(std::mt19937_64& rng, int blocks) {
    std::uniform_real_distribution<double> W(0.05, 0.6), H(0.0, 2.0);
    std::vector<double> bp{0.0};
    std::vector<double> vals;
    for (int b = 0; b < blocks; ++b) {
        bp.push_back(bp.back() + W(rng));
        double h = H(rng);
        if (h < 0.2) h = 0.0;  // occasional interior gap
        vals.push_back(h);
    }
    if (vals.front() == 0.0) vals.front() = 0.5;
    if (vals.back() == 0.0) vals.back() = 0.5;
    PiecewiseConstantDensity d(bp, vals);
    double m = d.mass();
    for (double& v : vals) v /= m;
    return PiecewiseConstantDensity(bp, vals);
}

} // namespace

TEST_CASE("atomize uniform block") {
    PiecewiseConstantDensity d({0.0, 1.0}, {1.0});
    auto r = atomize(d, 4);
    REQUIRE(r.positions.size() == 5);
    CHECK(r.positions[0] == 0.0);
    CHECK(r.positions[1] == Catch::Approx(0.25).margin(1e-15));
    CHECK(r.positions[2] == Catch::Approx(0.5).margin(1e-15));
    CHECK(r.positions[3] == Catch::Approx(0.75).margin(1e-15));
    CHECK(r.positions[4] == 1.0);
    CHECK(r.ell_n == 0.25);
    CHECK(verify_equal_mass(d, r) == 0.0);
}

TEST_CASE("atomize rescaled uniform block") {
    PiecewiseConstantDensity d({0.0, 0.5}, {2.0});
    auto r = atomize(d, 2);
    CHECK(r.positions[0] == 0.0);
    CHECK(r.positions[1] == Catch::Approx(0.25).margin(1e-15));
    CHECK(r.positions[2] == 0.5);
    CHECK(verify_equal_mass(d, r) == 0.0);
}

TEST_CASE("atomize across an interior gap takes the left plateau edge") {
    // CDF plateau on [0.5, 1.5]: sup{ F < 0.5 } = 0.5
    PiecewiseConstantDensity d({0.0, 0.5, 1.5, 2.0}, {1.0, 0.0, 1.0});
    auto r = atomize(d, 2);
    REQUIRE(r.positions.size() == 3);
    CHECK(r.positions[0] == 0.0);
    CHECK(r.positions[1] == 0.5);
    CHECK(r.positions[2] == 2.0);
    CHECK(verify_equal_mass(d, r) == 0.0);

    // bisection oracle agrees
    double oracle = bisect_next(d, 0.0, 0.5, 2.0);
    CHECK(std::abs(oracle - 0.5) < 1e-9);
}

TEST_CASE("atomize symmetric block emits exact zero and k_n") {
    PiecewiseConstantDensity d({-0.5, 0.5}, {1.0});
    auto r = atomize(d, 2);
    CHECK(r.positions[0] == -0.5);
    CHECK(r.positions[1] == 0.0);
    CHECK(r.positions[2] == 0.5);
    REQUIRE(r.k_n.has_value());
    CHECK(*r.k_n == 1);

    auto r4 = atomize(d, 4);
    CHECK(r4.positions[2] == 0.0);
    CHECK(*r4.k_n == 2);
}

TEST_CASE("atomize errors") {
    PiecewiseConstantDensity half({0.0, 0.5}, {1.0});
    CHECK_THROWS_AS(atomize(half, 4), normalization_error);
    PiecewiseConstantDensity d({0.0, 1.0}, {1.0});
    CHECK_THROWS_AS(atomize(d, 1), invalid_input);
}

TEST_CASE("atomize matches the bisection oracle on random densities") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        auto d = random_blocks(rng, 12);
        int n = 17;
        auto r = atomize(d, n);
        double prev = r.positions[0];
        auto [lo, hi] = d.support_hull();
        for (int i = 1; i < n; ++i) {
            double oracle = bisect_next(d, prev, r.ell_n, hi);
            CHECK(std::abs(r.positions[i] - oracle) < 1e-9);
            prev = r.positions[i];
        }
    }
}

TEST_CASE("equal mass to 1e-12 on random 20-block densities, n=50") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        auto d = random_blocks(rng, 20);
        auto r = atomize(d, 50);
        CHECK(verify_equal_mass(d, r) <= 1e-12);

        // telescoping: total mass between first and last particle is 1
        CHECK(d.integrate(r.positions.front(), r.positions.back()) == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("initial discrete density is bounded by R_bar (mean value)") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto d = random_blocks(rng, 15);
        auto r = atomize(d, 40);
        double r_bar = d.max_value();
        for (int i = 0; i < r.n; ++i) {
            double ri = r.ell_n / (r.positions[i + 1] - r.positions[i]);
            CHECK(ri <= r_bar * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("initial reconstructed TV does not exceed TV of the data") {
    std::mt19937_64 rng(5150);
    for (int trial = 0; trial < 20; ++trial) {
        auto d = random_blocks(rng, 15);
        auto r = atomize(d, 60);
        auto rec = reconstruct(r.positions, r.ell_n);
        CHECK(total_variation(rec) <= total_variation(d) + 1e-10);
    }

    // uniform block: equality, TV = 2 for every n
    PiecewiseConstantDensity block({0.0, 1.0}, {1.0});
    for (int n : {4, 16, 64}) {
        auto r = atomize(block, n);
        CHECK(total_variation(reconstruct(r.positions, r.ell_n)) == Catch::Approx(2.0).margin(1e-12));
    }
}
