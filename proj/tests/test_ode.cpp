#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pmia/dopri5.hpp"

using namespace pmia;

TEST_CASE("dopri5 integrates exponential decay accurately") {
    Dopri5<1>::Options opt;
    opt.rtol = 1e-11;
    opt.atol = 1e-13;
    opt.h_init = 1e-3;
    opt.h_max = 0.5;
    Dopri5<1> stepper([](double, const std::array<double, 1>& y,
                         std::array<double, 1>& dy) { dy[0] = -y[0]; },
                      opt);
    stepper.start(0.0, {1.0});
    while (stepper.x() < 5.0) REQUIRE(stepper.step());
    CHECK(stepper.y()[0] == Catch::Approx(std::exp(-stepper.x())).epsilon(1e-9));
}

TEST_CASE("dense output interpolates the harmonic oscillator") {
    Dopri5<2>::Options opt;
    opt.rtol = 1e-10;
    opt.atol = 1e-12;
    opt.h_init = 1e-2;
    opt.h_max = 0.4;
    Dopri5<2> stepper(
        [](double, const std::array<double, 2>& y, std::array<double, 2>& dy) {
            dy[0] = y[1];
            dy[1] = -y[0];
        },
        opt);
    stepper.start(0.0, {1.0, 0.0});
    double worst = 0.0;
    while (stepper.x() < 10.0) {
        REQUIRE(stepper.step());
        for (int k = 1; k < 8; ++k) {
            const double xq =
                stepper.x_prev() + (stepper.x() - stepper.x_prev()) * k / 8.0;
            const auto yq = stepper.dense(xq);
            worst = std::max(worst, std::abs(yq[0] - std::cos(xq)));
            worst = std::max(worst, std::abs(yq[1] + std::sin(xq)));
        }
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("tightening tolerances reduces the error") {
    auto run = [](double rtol) {
        Dopri5<1>::Options opt;
        opt.rtol = rtol;
        opt.atol = rtol * 1e-2;
        opt.h_init = 1e-2;
        opt.h_max = 1.0;
        Dopri5<1> stepper([](double x, const std::array<double, 1>& y,
                             std::array<double, 1>& dy) { dy[0] = std::cos(x) * y[0]; },
                          opt);
        stepper.start(0.0, {1.0});
        while (stepper.x() < 6.0) {
            if (!stepper.step()) return 1.0;
        }
        // land on the endpoint with the interpolant
        const auto y = stepper.x() > 6.0 && stepper.have_step()
                           ? stepper.dense(6.0)
                           : stepper.y();
        return std::abs(y[0] - std::exp(std::sin(6.0)));
    };
    const double coarse = run(1e-6);
    const double fine = run(1e-10);
    CHECK(fine < coarse);
    CHECK(fine < 1e-8);
}

TEST_CASE("per-point step cap is honored") {
    Dopri5<1>::Options opt;
    opt.rtol = 1e-8;
    opt.atol = 1e-10;
    opt.h_init = 0.5;
    opt.h_max = 10.0;
    opt.max_step_fn = [](double, const std::array<double, 1>&) { return 0.03125; };
    Dopri5<1> stepper([](double, const std::array<double, 1>& y,
                         std::array<double, 1>& dy) { dy[0] = y[0]; },
                      opt);
    stepper.start(0.0, {1.0});
    for (int i = 0; i < 20; ++i) {
        REQUIRE(stepper.step());
        CHECK(stepper.x() - stepper.x_prev() <= 0.03125 + 1e-12);
    }
}
