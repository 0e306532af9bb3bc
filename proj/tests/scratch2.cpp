#include <chrono>
#include <cstdio>

#include "pmia/params.hpp"
#include "pmia/pde.hpp"
#include "pmia/shooting.hpp"

using namespace pmia;

static void study(Params p) {
    const auto e = exponents(p);
    ShootingOptions so;
    so.bracket_tol = 1e-13;
    const auto r = solve(p, e, so);
    const auto fs = make_profile_star(r, e);
    std::printf("== m=%g q=%g sigma=%g: alpha=%.4f beta=%.4f a*=%.6g xi0*=%.6g fitp %+0.3f%% "
                "A %+0.3f%%\n",
                p.m, p.q, p.sigma, e.alpha, e.beta, r.a_star, r.xi0_star,
                100.0 * (r.fit.exponent_fit / r.fit.exponent_theory - 1.0),
                100.0 * (r.fit.amplitude_fit / r.fit.amplitude_theory - 1.0));

    for (int n : {2048}) {
        for (double frac : {1.0}) {
            RadialGrid g{fs.xi0 * 1.05, n};
            auto st = init_state(g, p, [&](double rr) { return fs(rr); });
            st.t = 1.0;
            DtPolicy pol;
            pol.dt = g.dr() * frac;
            StepStats stats;
            SchemeOptions sch;
            sch.stats = &stats;
            const auto t0 = std::chrono::steady_clock::now();
            auto sum = run(st, 10.0, pol, p, sch, {2.0, 5.0}, &fs);
            const double sec =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            double worst = 0.0;
            for (const auto& tp : sum.series)
                if (std::isfinite(tp.rescaled_error)) worst = std::max(worst, tp.rescaled_error);
            const double err_end = rescaled_error(st, fs);
            std::printf("  n=%5d dt=dr*%-5g err_end=%.5f worst=%.5f bound=%.5f retries=%d "
                        "steps=%zu iters/step=%.1f evals/step=%.1f time=%.1fs\n",
                        n, frac, err_end, worst, 5.0 * (g.dr() + pol.dt), sum.newton_retries,
                        sum.steps, double(stats.newton_iters) / sum.steps,
                        double(stats.residual_evals) / sum.steps, sec);
        }
    }
    std::printf("  tail.valid=%d match_slope=%.2e\n", (int)r.tail.valid, r.tail.match_slope_rel);
}

int main() {
    study(Params{2.0, 0.9, 3.0, 1});
    study(Params{2.0, 0.9, 6.0, 1});
    return 0;
}
