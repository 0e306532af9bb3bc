#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pmia/params.hpp"
#include "pmia/rng.hpp"

using namespace pmia;

namespace {

Params random_admissible(Rng& rng) {
    Params p;
    p.m = rng.uniform(1.05, 3.5);
    p.q = rng.uniform(0.05, 0.95);
    p.dim = rng.uniform_int(1, 4);
    p.sigma = p.sigma_threshold() * rng.uniform(1.05, 4.0) + rng.uniform(0.0, 2.0);
    return p;
}

} // namespace

TEST_CASE("validate accepts the reference parameter set") {
    Params p{2.0, 0.5, 2.0, 1};
    REQUIRE_NOTHROW(validate(p)); // threshold is 2*0.5/1 = 1 < 2
}

TEST_CASE("validate rejects sigma at or below the threshold") {
    Params p{2.0, 0.5, 0.5, 1};
    try {
        validate(p);
        FAIL("expected OutOfRange");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OutOfRange);
        CHECK(std::string(e.what()).find("sigma") != std::string::npos);
    }
    // borderline value is rejected as well: the admissible region is open
    p.sigma = p.sigma_threshold();
    REQUIRE_THROWS_AS(validate(p), Error);
}

TEST_CASE("validate rejects m <= 1") {
    Params p{1.0, 0.5, 3.0, 2};
    try {
        validate(p);
        FAIL("expected OutOfRange");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OutOfRange);
        CHECK(std::string(e.what()).find("m <=") != std::string::npos);
    }
}

TEST_CASE("exponents of the reference set") {
    // denominator sigma(m-1)+2(q-1) = 2 - 1 = 1, so alpha = 4 and beta = 1.5
    auto e = exponents(Params{2.0, 0.5, 2.0, 1});
    CHECK(e.alpha == Catch::Approx(4.0).epsilon(1e-15));
    CHECK(e.beta == Catch::Approx(1.5).epsilon(1e-15));
    // k3 = ((1-q)/beta)^{1/(1-q)} = (0.5/1.5)^2 = 1/9
    CHECK(e.k3 == Catch::Approx(1.0 / 9.0).epsilon(1e-14));
    CHECK(e.gamma_small == Catch::Approx(-0.5));
    CHECK(e.gamma_large == Catch::Approx(-1.5 / 4.0));
}

TEST_CASE("k2 equals one at zero and decreases") {
    Rng rng(42);
    for (int it = 0; it < 200; ++it) {
        auto e = exponents(random_admissible(rng));
        CHECK(e.k2(0.0) == Catch::Approx(1.0).epsilon(1e-14));
        double prev = e.k2(0.0);
        for (double z = 0.25; z <= 8.0; z += 0.25) {
            const double cur = e.k2(z);
            CHECK(cur < prev);
            prev = cur;
        }
        // finite-difference slope is negative where the curve is steepest
        const double h = 1e-6;
        const double slope = (e.k2(1.0 + h) - e.k2(1.0 - h)) / (2.0 * h);
        CHECK(slope < 0.0);
    }
}

TEST_CASE("exponent identities over random admissible parameters") {
    Rng rng(7);
    for (int it = 0; it < 10000; ++it) {
        const Params p = random_admissible(rng);
        const auto e = exponents(p);
        REQUIRE(e.alpha > 0.0);
        REQUIRE(e.beta > 0.0);
        // alpha = beta (sigma+2)/(m-q)
        REQUIRE(e.alpha ==
                Catch::Approx(e.beta * (p.sigma + 2.0) / (p.m - p.q)).epsilon(1e-12));
        // stationary exponent identity m(sigma+2)-2(m-q) = q(sigma+2)+sigma(m-q)
        const double lhs = p.m * (p.sigma + 2.0) - 2.0 * (p.m - p.q);
        const double rhs = p.q * (p.sigma + 2.0) + p.sigma * (p.m - p.q);
        REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-13));
    }
}

TEST_CASE("shrinking radius reference value") {
    const Params p{2.0, 0.5, 2.0, 1};
    // max{ (2/0.5)^{1/2}, (4*2*2.5/2.25)^{1/4} } = max{2, (80/9)^{1/4}} = 2
    const double r = shrinking_radius(p, 1.0, 1.0);
    const double branch2 = std::pow(80.0 / 9.0, 0.25);
    REQUIRE(branch2 < 2.0);
    CHECK(r == Catch::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("shrinking radius rejects degenerate inputs") {
    const Params p{2.0, 0.5, 2.0, 1};
    REQUIRE_THROWS_AS(shrinking_radius(p, 0.0, 1.0), Error);
    REQUIRE_THROWS_AS(shrinking_radius(p, 1.0, 0.0), Error);
    REQUIRE_THROWS_AS(shrinking_radius(p, -1.0, 1.0), Error);
}

TEST_CASE("shrinking radius is non-increasing in T") {
    Rng rng(11);
    for (int it = 0; it < 500; ++it) {
        const Params p = random_admissible(rng);
        const double sup = rng.uniform(0.1, 10.0);
        const double t1 = rng.uniform(0.01, 5.0);
        const double t2 = t1 * rng.uniform(1.0, 10.0);
        REQUIRE(shrinking_radius(p, sup, t1) >= shrinking_radius(p, sup, t2));
    }
}

TEST_CASE("regime detection") {
    CHECK(regime_of(Params{2.0, 0.5, 2.0, 1}) == Regime::HighSum);
    CHECK(regime_of(Params{1.2, 0.5, 6.0, 1}) == Regime::LowSum);
    CHECK(regime_of(Params{1.3, 0.7, 8.0, 1}) == Regime::Critical);
    CHECK(regime_of(Params{1.5, 0.5, 4.0, 3}) == Regime::Critical);
}
