#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ftl/metrics.hpp"

using namespace ftl;

namespace {

PiecewiseConstantDensity random_unit_density(std::mt19937_64& rng, int blocks) {
    std::uniform_real_distribution<double> W(0.05, 0.5), H(0.05, 2.0), S(-1.0, 1.0);
    std::vector<double> bp{S(rng)};
    std::vector<double> vals;
    for (int b = 0; b < blocks; ++b) {
        bp.push_back(bp.back() + W(rng));
        vals.push_back(H(rng));
    }
    PiecewiseConstantDensity d(bp, vals);
    double m = d.mass();
    for (double& v : vals) v /= m;
    return PiecewiseConstantDensity(bp, vals);
}

/// Brute-force W1 oracle: trapezoid rule on |X1 - X2| over z-samples.
double w1_bruteforce(const PiecewiseConstantDensity& a, const PiecewiseConstantDensity& b,
                     int samples) {
    auto Xa = pseudo_inverse(a);
    auto Xb = pseudo_inverse(b);
    double total = 0.0;
    double prev = std::abs(Xa(0.0) - Xb(0.0));
    for (int i = 1; i <= samples; ++i) {
        double z = static_cast<double>(i) / samples;
        double cur = std::abs(Xa(z) - Xb(z));
        total += 0.5 * (prev + cur) / samples;
        prev = cur;
    }
    return total;
}

} // namespace

TEST_CASE("reconstruct") {
    auto d1 = reconstruct({0.0, 0.25, 0.5, 0.75, 1.0}, 0.25);
    for (double v : d1.values) CHECK(v == Catch::Approx(1.0).margin(1e-15));

    auto d2 = reconstruct({0.0, 1.0, 2.0}, 0.5);
    CHECK(d2.values[0] == 0.5);
    CHECK(d2.values[1] == 0.5);

    auto d3 = reconstruct({0.0, 0.5, 2.0}, 0.5);
    CHECK(d3.values[0] == Catch::Approx(1.0));
    CHECK(d3.values[1] == Catch::Approx(1.0 / 3.0));
    CHECK(d3.mass() == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("total_variation") {
    CHECK(total_variation(PiecewiseConstantDensity({0.0, 1.0}, {0.7})) == Catch::Approx(1.4));
    CHECK(total_variation(PiecewiseConstantDensity({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 2.0})) ==
          Catch::Approx(6.0));
}

TEST_CASE("smoothed_tv") {
    PiecewiseConstantDensity d({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 2.0});
    CHECK(smoothed_tv(d, SmoothedAbs(1e-12)) == Catch::Approx(6.0).margin(1e-9));

    PiecewiseConstantDensity flat({0.0, 1.0, 2.0}, {1.0, 1.0});
    CHECK(smoothed_tv(flat, SmoothedAbs(1.0)) == Catch::Approx(2.5));  // eta_sigma(0) = sigma/2

    // quadratic branch: 3 + eta_10(-2) + eta_10(1) = 3 + 5.2 + 5.05
    CHECK(smoothed_tv(d, SmoothedAbs(10.0)) == Catch::Approx(13.25).margin(1e-12));
}

TEST_CASE("smoothed abs properties") {
    SmoothedAbs eta(0.3);
    for (double z : {-2.0, -0.31, -0.2, -0.05, 0.0, 0.01, 0.29, 0.31, 5.0}) {
        CHECK(eta(z) >= std::abs(z));
        CHECK(std::abs(eta.deriv(z)) <= 1.0);
        double prod = eta.deriv(z) * z;
        CHECK(prod >= -1e-15);
        CHECK(prod <= eta(z) + 1e-15);
    }
    CHECK(eta(0.4) == 0.4);
    CHECK(eta(0.0) == Catch::Approx(0.15));
}

TEST_CASE("smoothed_tv envelope and monotone limit") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        auto d = random_unit_density(rng, 10);
        double tv = total_variation(d);
        double m = static_cast<double>(d.values.size());
        double prev = std::numeric_limits<double>::infinity();
        for (double sigma : {1.0, 0.1, 0.01, 1e-4, 1e-8}) {
            double tvs = smoothed_tv(d, SmoothedAbs(sigma));
            CHECK(tvs >= tv - 1e-12);
            CHECK(tvs <= tv + (m - 1.0) * sigma / 2.0 + 1e-12);
            CHECK(tvs <= prev + 1e-12);  // non-decreasing in sigma
            prev = tvs;
        }
    }
}

TEST_CASE("pseudo_inverse") {
    auto X1 = pseudo_inverse(PiecewiseConstantDensity({0.0, 1.0}, {1.0}));
    for (double z : {0.0, 0.25, 0.5, 0.99}) CHECK(X1(z) == Catch::Approx(z).margin(1e-14));

    auto X2 = pseudo_inverse(PiecewiseConstantDensity({3.0, 4.0}, {1.0}));
    for (double z : {0.0, 0.3, 0.8}) CHECK(X2(z) == Catch::Approx(3.0 + z).margin(1e-14));

    // heights [1, 1/3] on [0,0.5],[0.5,2]
    auto X3 = pseudo_inverse(PiecewiseConstantDensity({0.0, 0.5, 2.0}, {1.0, 1.0 / 3.0}));
    CHECK(X3(0.25) == Catch::Approx(0.25).margin(1e-14));
    CHECK(X3(0.75) == Catch::Approx(0.5 + 3.0 * 0.25).margin(1e-14));

    CHECK_THROWS_AS(pseudo_inverse(PiecewiseConstantDensity({0.0, 1.0}, {0.5})), invalid_input);
}

TEST_CASE("wasserstein1 closed form") {
    PiecewiseConstantDensity u({0.0, 1.0}, {1.0});
    CHECK(wasserstein1(u, u) == 0.0);

    PiecewiseConstantDensity shifted({0.125, 1.125}, {1.0});
    CHECK(wasserstein1(u, shifted) == Catch::Approx(0.125).margin(1e-14));

    PiecewiseConstantDensity tall({0.0, 0.5}, {2.0});
    CHECK(wasserstein1(u, tall) == Catch::Approx(0.25).margin(1e-14));

    PiecewiseConstantDensity heavy({0.0, 1.0}, {0.9});
    CHECK_THROWS_AS(wasserstein1(u, heavy), invalid_input);
}

TEST_CASE("wasserstein1 agrees with the brute-force quantile oracle") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = random_unit_density(rng, 8);
        auto b = random_unit_density(rng, 6);
        double exact = wasserstein1(a, b);
        double brute = w1_bruteforce(a, b, 100000);
        CHECK(std::abs(exact - brute) <= 1e-4);
    }
}

TEST_CASE("wasserstein1 is a metric on random densities") {
    std::mt19937_64 rng(321);
    for (int trial = 0; trial < 15; ++trial) {
        auto a = random_unit_density(rng, 6);
        auto b = random_unit_density(rng, 7);
        auto c = random_unit_density(rng, 5);
        double ab = wasserstein1(a, b), ba = wasserstein1(b, a);
        CHECK(ab == Catch::Approx(ba).margin(1e-12));
        CHECK(wasserstein1(a, a) <= 1e-12);
        CHECK(wasserstein1(a, c) <= ab + wasserstein1(b, c) + 1e-12);
        CHECK(ab >= 0.0);
    }
}

TEST_CASE("l1_distance") {
    PiecewiseConstantDensity u({0.0, 1.0}, {1.0});
    CHECK(l1_distance(u, u) == 0.0);
    PiecewiseConstantDensity v({0.5, 1.5}, {1.0});
    CHECK(l1_distance(u, v) == Catch::Approx(1.0).margin(1e-14));
    PiecewiseConstantDensity w({0.0, 1.0}, {0.9});
    CHECK(l1_distance(u, w) == Catch::Approx(0.1).margin(1e-14));
}

TEST_CASE("tv_bound") {
    CHECK(tv_bound(0.0, 1.0, 2.0, {}) == Catch::Approx(2.0));

    TvBoundCoeffs lin{0.5, 0.25, 0.0, 0.0};
    CHECK(tv_bound(2.0, 0.0, 2.0, lin) == Catch::Approx(2.0 + 1.0 + 0.25));

    // frozen from an independent evaluation of (3+e) * exp(1 + 0.1 e)
    TvBoundCoeffs c{1.0, 1.0, 0.5, 0.1};
    CHECK(tv_bound(1.0, 1.0, 2.0, c) == Catch::Approx(20.39921793252933).margin(1e-11));
}

TEST_CASE("reconstruct preserves unit mass") {
    std::mt19937_64 rng(888);
    std::uniform_real_distribution<double> G(0.01, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 50;
        std::vector<double> pos{0.0};
        for (int i = 0; i < n; ++i) pos.push_back(pos.back() + G(rng));
        auto d = reconstruct(pos, 1.0 / n);
        CHECK(std::abs(d.mass() - 1.0) <= 1e-13);
    }
}
