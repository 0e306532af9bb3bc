#include <cstdio>
#include <cmath>
#include <vector>

#include "pmia/params.hpp"
#include "pmia/pde.hpp"
#include "pmia/shooting.hpp"

using namespace pmia;

int main() {
    const Params p{2.0, 0.9, 6.0, 1};
    const auto e = exponents(p);
    ShootingOptions so;
    so.bracket_tol = 1e-13;
    const auto r = solve(p, e, so);
    const auto fs = make_profile_star(r, e);

    RadialGrid g{fs.xi0 * 1.05, 2048};
    auto state = init_state(g, p, [&](double rr) { return fs(rr); });
    state.t = 1.0;
    const double dt = g.dr();
    // advance a bit first
    for (int k = 0; k < 40; ++k) state = step_implicit(state, dt, p);

    // now trace one step verbosely
    const int n = g.n_nodes(), ni = n - 1;
    const detail::RadialOperator lap(g, p.dim);
    const double inv_m = 1.0 / p.m, qm = p.q / p.m, eps = 1e-14;
    const double scale = state.sup();
    const double v_band = std::pow(1e-7 * scale, p.m);
    std::vector<double> rs(ni, 0.0);
    for (int i = 1; i < ni; ++i) rs[i] = dt * std::pow(g.r(i), p.sigma);

    std::vector<double> v = state.v;
    std::vector<double> resid(ni), sub(ni), diag(ni), sup(ni), rhs(ni);
    auto node_solve = [&](std::vector<double>& w, int i) {
        const double diagc =
            dt * (i == 0 ? lap.w_plus[0] : lap.w_plus[i] + lap.w_minus[i]) * lap.inv_dr2;
        const double inflow =
            dt * (i == 0 ? lap.w_plus[0] * w[1]
                         : lap.w_plus[i] * w[i + 1] + lap.w_minus[i] * w[i - 1]) *
            lap.inv_dr2;
        const double s = inflow + state.u[i];
        if (s <= 0.0) {
            w[i] = 0.0;
            return;
        }
        auto G = [&](double x) {
            return std::sqrt(x) + rs[i] * std::pow(x, qm) + diagc * x - s;
        };
        if (G(1e-300) >= 0.0) {
            w[i] = 0.0;
            return;
        }
        double lo = 1e-300, hi = std::max(w[i], v_band);
        while (G(hi) < 0.0) hi *= 4.0;
        for (int k = 0; k < 90; ++k) {
            const double mid = std::sqrt(lo * hi);
            (G(mid) < 0.0 ? lo : hi) = mid;
        }
        w[i] = std::sqrt(lo * hi);
    };
    int nband = 0;
    auto eval = [&](std::vector<double>& w, std::vector<double>& out, int& amax) {
        nband = 0;
        for (int i = 0; i < ni; ++i) {
            if (w[i] < 0.0) w[i] = 0.0;
            if (w[i] <= v_band) {
                node_solve(w, i);
                ++nband;
            }
        }
        double norm = 0.0;
        amax = -1;
        for (int i = 0; i < ni; ++i) {
            double gi = std::sqrt(w[i]) - dt * lap.apply(w, i) - state.u[i];
            if (rs[i] != 0.0 && w[i] > 0.0) gi += rs[i] * std::pow(w[i], qm);
            out[i] = gi;
            if (std::abs(gi) > norm) {
                norm = std::abs(gi);
                amax = i;
            }
        }
        return norm;
    };

    int am;
    double norm = eval(v, resid, am);
    for (int it = 0; it < 40; ++it) {
        std::printf("it %2d norm=%.4e at i=%4d (r/front=%.4f v=%.3e) band_nodes=%d\n", it, norm,
                    am, g.r(am) / (fs.xi0 / std::pow(state.t, fs.beta)), v[am], nband);
        if (norm < 1e-13 * scale) break;
        for (int i = 0; i < ni; ++i) {
            const double wi = std::max(v[i], eps);
            double d = inv_m * std::pow(wi, inv_m - 1.0);
            d += dt * (i == 0 ? lap.w_plus[0] : lap.w_plus[i] + lap.w_minus[i]) * lap.inv_dr2;
            if (rs[i] != 0.0) d += rs[i] * qm * std::pow(wi, qm - 1.0);
            diag[i] = d;
            sub[i] = i > 0 ? -dt * lap.w_minus[i] * lap.inv_dr2 : 0.0;
            sup[i] = -dt * lap.w_plus[i] * lap.inv_dr2;
            rhs[i] = -resid[i];
        }
        sup[ni - 1] = 0.0;
        detail::solve_tridiag(sub, diag, sup, rhs);
        double lambda = 1.0;
        std::vector<double> trial(n, 0.0), tre(ni);
        int tam;
        for (int ls = 0; ls < 40; ++ls) {
            for (int i = 0; i < ni; ++i) trial[i] = std::max(0.0, v[i] + lambda * rhs[i]);
            trial[ni] = 0.0;
            const double tn = eval(trial, tre, tam);
            if (tn < norm) {
                v = trial;
                resid = tre;
                norm = tn;
                am = tam;
                break;
            }
            lambda *= 0.5;
            if (ls == 39) {
                std::printf("  stall\n");
                return 0;
            }
        }
    }
    return 0;
}
