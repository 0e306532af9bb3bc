#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pmia/params.hpp"
#include "pmia/rng.hpp"
#include "pmia/series.hpp"

using namespace pmia;

TEST_CASE("k0 is the largest integer strictly below sigma") {
    CHECK(sigma_k0(2.0) == 1);
    CHECK(sigma_k0(2.5) == 2);
    CHECK(sigma_k0(6.0) == 5);
    CHECK(sigma_k0(2.0 + 1e-15) == 1); // integer within tolerance
    CHECK(sigma_k0(1.0000001) == 1);
}

TEST_CASE("series reproduces the initial condition at xi = 0") {
    const Params p{2.0, 0.5, 2.0, 1};
    const auto e = exponents(p);
    for (double a : {0.3, 1.0, 2.7}) {
        auto [F, dF] = series_init(p, e, a, 0.0);
        CHECK(F == Catch::Approx(std::pow(a, p.m)).epsilon(1e-15));
        CHECK(dF == 0.0);
    }
}

TEST_CASE("second-order coefficient matches -alpha a / (2N)") {
    Rng rng(3);
    for (int it = 0; it < 50; ++it) {
        Params p;
        p.m = rng.uniform(1.1, 3.0);
        p.q = rng.uniform(0.1, 0.9);
        p.dim = rng.uniform_int(1, 4);
        p.sigma = p.sigma_threshold() + rng.uniform(0.5, 4.0);
        const auto e = exponents(p);
        const double a = rng.uniform(0.2, 3.0);
        const auto s = build_series(p, e, a);
        // F''(0) = 2 B_2 = -alpha a / N
        CHECK(2.0 * s.coeffs_B[2] ==
              Catch::Approx(-e.alpha * a / p.dim).epsilon(1e-12));
    }
}

TEST_CASE("reference coefficients for m=2, q=0.5, sigma=2, N=1, a=1") {
    const Params p{2.0, 0.5, 2.0, 1};
    const auto e = exponents(p);
    const auto s = build_series(p, e, 1.0);
    // Omega_2 = -alpha/(2N) = -2 and B_2 = a^{m-(m-1)} Omega_2 = -2
    CHECK(s.coeffs_B[2] == Catch::Approx(-2.0).epsilon(1e-15));
    // sigma integer: polynomial runs to k0+3 = 4
    REQUIRE(s.coeffs_B.size() == 5);
    // B_4 = (2 beta - alpha) omega_2 / (4(N+2)) with omega_2 = -1
    CHECK(s.coeffs_B[4] == Catch::Approx(1.0 / 12.0).epsilon(1e-14));
    CHECK(s.sigma_coeff == Catch::Approx(1.0 / 12.0).epsilon(1e-15));
}

TEST_CASE("odd-index coefficients vanish") {
    const Params p{1.7, 0.4, 5.3, 2};
    const auto e = exponents(p);
    const auto s = build_series(p, e, 1.4);
    for (std::size_t j = 1; j < s.coeffs_B.size(); j += 2) {
        CHECK(s.coeffs_B[j] == 0.0);
        CHECK(s.coeffs_b[j] == 0.0);
    }
}

TEST_CASE("sigma-order coefficient") {
    Rng rng(17);
    for (int it = 0; it < 50; ++it) {
        Params p;
        p.m = rng.uniform(1.1, 3.0);
        p.q = rng.uniform(0.1, 0.9);
        p.dim = rng.uniform_int(1, 3);
        p.sigma = p.sigma_threshold() + rng.uniform(0.5, 4.0);
        const auto e = exponents(p);
        const double a = rng.uniform(0.2, 3.0);
        const auto s = build_series(p, e, a);
        CHECK(s.sigma_coeff ==
              Catch::Approx(std::pow(a, p.q) /
                            ((p.sigma + 2.0) * (p.sigma + p.dim)))
                  .epsilon(1e-13));
    }
}

TEST_CASE("coefficients scale as a^{m - j(m-1)/2} from the unit profile") {
    const Params p{1.6, 0.35, 4.7, 3};
    const auto e = exponents(p);
    const auto unit = build_series(p, e, 1.0);
    for (double a : {0.2, 0.9, 3.1}) {
        const auto s = build_series(p, e, a);
        REQUIRE(s.coeffs_B.size() == unit.coeffs_B.size());
        for (std::size_t j = 0; j < s.coeffs_B.size(); ++j) {
            const double expect =
                std::pow(a, p.m - static_cast<double>(j) * (p.m - 1.0) / 2.0) *
                unit.coeffs_B[j];
            if (unit.coeffs_B[j] == 0.0)
                CHECK(s.coeffs_B[j] == 0.0);
            else
                CHECK(s.coeffs_B[j] == Catch::Approx(expect).epsilon(1e-11));
        }
    }
}

TEST_CASE("f-coefficients are consistent with F = f^m for m = 2") {
    // with m = 2, F = f*f, so B_j must equal the convolution of the b's
    const Params p{2.0, 0.6, 3.4, 2};
    const auto e = exponents(p);
    const auto s = build_series(p, e, 1.3);
    for (std::size_t j = 0; j < s.coeffs_B.size(); ++j) {
        double conv = 0.0;
        for (std::size_t i = 0; i <= j; ++i) conv += s.coeffs_b[i] * s.coeffs_b[j - i];
        CHECK(s.coeffs_B[j] == Catch::Approx(conv).margin(1e-13));
    }
}

TEST_CASE("series_init rejects evaluation outside the heuristic radius") {
    const Params p{2.0, 0.5, 2.0, 1};
    const auto e = exponents(p);
    REQUIRE_THROWS_AS(series_init(p, e, 1.0, 2.0), Error);
    try {
        series_init(p, e, 1.0, 2.0);
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::SeriesDiverged);
    }
    REQUIRE_NOTHROW(series_init(p, e, 1.0, 1e-3));
}

TEST_CASE("series derivative matches a finite difference of itself") {
    const Params p{1.8, 0.45, 3.6, 1};
    const auto e = exponents(p);
    const auto s = build_series(p, e, 0.8);
    const double xi = 5e-3, h = 1e-7;
    const auto [Fm, dFm] = s.eval(xi - h);
    const auto [Fp, dFp] = s.eval(xi + h);
    const auto [F, dF] = s.eval(xi);
    (void)F;
    (void)dFm;
    (void)dFp;
    CHECK(dF == Catch::Approx((Fp - Fm) / (2.0 * h)).epsilon(1e-6));
}
