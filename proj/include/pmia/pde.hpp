#ifndef PMIA_PDE_HPP
#define PMIA_PDE_HPP

// Radial Cauchy problem u_t = Laplace(u^m) - r^sigma u^q on [0, r_max] with
// a zero-flux condition at the origin and u = 0 at r_max.
//
// Time stepping is backward Euler on v = u^m: each step solves per node
//
//   v^{1/m} - dt Lap_r(v) + dt r^sigma v^{q/m} = u_old,
//
// by a damped Newton iteration with tridiagonal linear algebra; v is clamped
// at zero between iterates and the non-Lipschitz powers get one-sided
// derivatives with a small floor inside the Jacobian. The scheme inherits
// the comparison principle and the sup-norm bound from its M-matrix
// structure, which is what the randomized suites check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "pmia/errors.hpp"
#include "pmia/params.hpp"
#include "pmia/profile.hpp"
#include "pmia/shooting.hpp"

namespace pmia {

struct RadialGrid {
    double r_max = 1.0;
    int n_cells = 128; // nodes 0..n_cells, spacing dr

    double dr() const { return r_max / n_cells; }
    double r(int i) const { return i * dr(); }
    int n_nodes() const { return n_cells + 1; }
};

struct RadialState {
    RadialGrid grid;
    double t = 0.0;
    std::vector<double> u; // node values, non-negative
    std::vector<double> v; // cached u^m

    double sup() const { return u.empty() ? 0.0 : *std::max_element(u.begin(), u.end()); }
};

inline RadialState init_state(const RadialGrid& grid, const Params& p,
                              const std::function<double(double)>& u0) {
    RadialState s;
    s.grid = grid;
    s.t = 0.0;
    s.u.resize(grid.n_nodes());
    s.v.resize(grid.n_nodes());
    for (int i = 0; i < grid.n_nodes(); ++i) {
        const double val = u0(grid.r(i));
        if (val < 0.0 || !std::isfinite(val))
            throw Error(ErrorCode::NegativeData, "initial datum negative or non-finite at r=" +
                                                     std::to_string(grid.r(i)));
        s.u[i] = val;
        s.v[i] = std::pow(val, p.m);
    }
    // Dirichlet closure at the outer edge
    s.u.back() = 0.0;
    s.v.back() = 0.0;
    return s;
}

struct StepStats {
    long newton_iters = 0;
    long residual_evals = 0;
};

struct SchemeOptions {
    double newton_tol = 1e-13;   // residual tolerance relative to sup u_old
    int max_newton = 1000;       // the first step from rough data is the worst case
    double jacobian_floor = 1e-14; // floor inside the one-sided power derivatives
    double absorption_scale = 1.0; // 0 switches the weight term off
    StepStats* stats = nullptr;    // optional accumulation across steps
};

namespace detail {

// Thomas algorithm; diag/sub/sup are overwritten.
inline void solve_tridiag(std::vector<double>& sub, std::vector<double>& diag,
                          std::vector<double>& sup, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

struct RadialOperator {
    // flux-form weights of r^{1-N} (r^{N-1} v')' on the uniform grid
    std::vector<double> w_minus, w_plus;
    double inv_dr2;

    RadialOperator(const RadialGrid& g, int dim) {
        const double dr = g.dr();
        inv_dr2 = 1.0 / (dr * dr);
        const double nu = dim - 1.0;
        w_minus.resize(g.n_nodes(), 0.0);
        w_plus.resize(g.n_nodes(), 0.0);
        for (int i = 1; i < g.n_nodes() - 1; ++i) {
            const double ri = g.r(i);
            w_plus[i] = std::pow((ri + 0.5 * dr) / ri, nu);
            w_minus[i] = std::pow((ri - 0.5 * dr) / ri, nu);
        }
        w_plus[0] = 2.0 * dim; // regularized stencil at the origin
    }

    double apply(const std::vector<double>& v, int i) const {
        if (i == 0) return w_plus[0] * (v[1] - v[0]) * inv_dr2;
        return (w_plus[i] * (v[i + 1] - v[i]) - w_minus[i] * (v[i] - v[i - 1])) * inv_dr2;
    }
};

} // namespace detail

// One backward-Euler step; throws NewtonDiverged when the iteration stalls
// (the driver halves dt and retries).
inline RadialState step_implicit(const RadialState& state, double dt, const Params& p,
                                 const SchemeOptions& opt = {}) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    const RadialGrid& g = state.grid;
    const int n = g.n_nodes();
    const int ni = n - 1; // unknowns 0..ni-1, Dirichlet closes node ni
    const detail::RadialOperator lap(g, p.dim);
    const double inv_m = 1.0 / p.m;
    const double qm = p.q / p.m;
    const double eps = opt.jacobian_floor;
    const double cw = opt.absorption_scale;

    std::vector<double> v = state.v; // iterate, v[ni] stays 0
    v[ni] = 0.0;
    std::vector<double> resid(ni), sub(ni), diag(ni), sup(ni), rhs(ni);

    // dt * weight coefficient per node, fixed for the whole step
    std::vector<double> rs(ni, 0.0);
    if (cw != 0.0)
        for (int i = 1; i < ni; ++i) rs[i] = dt * cw * std::pow(g.r(i), p.sigma);

    // x^e with a fast path for the square root (m = 2 is common)
    auto xpow = [](double x, double e) { return e == 0.5 ? std::sqrt(x) : std::pow(x, e); };

    const double scale = std::max(state.sup(), 1e-300);
    const double tol = opt.newton_tol * scale;

    // Near the moving front the per-node roots decay super-exponentially
    // and the absorption power has infinite slope at zero, which makes the
    // global Newton direction ricochet on those nodes. Nodes below v_band
    // are therefore equilibrated by a scalar solve of their own equation
    // (monotone in v_i, neighbors frozen) on every evaluation; Newton only
    // has to handle the smooth part.
    const double v_band = std::pow(1e-7 * scale, p.m);

    auto node_solve = [&](std::vector<double>& w, int i) {
        const double diagc =
            dt * (i == 0 ? lap.w_plus[0] : lap.w_plus[i] + lap.w_minus[i]) * lap.inv_dr2;
        const double inflow = dt *
                              (i == 0 ? lap.w_plus[0] * w[1]
                                      : lap.w_plus[i] * w[i + 1] + lap.w_minus[i] * w[i - 1]) *
                              lap.inv_dr2;
        const double s = inflow + state.u[i];
        if (s <= 0.0) {
            w[i] = 0.0;
            return;
        }
        const double ri = rs[i];
        auto G = [&](double x) {
            return xpow(x, inv_m) + (ri != 0.0 ? ri * xpow(x, qm) : 0.0) + diagc * x - s;
        };
        double lo = 1e-300;
        if (G(lo) >= 0.0) {
            w[i] = 0.0;
            return;
        }
        double hi = std::max(w[i], v_band);
        while (G(hi) < 0.0) hi *= 4.0;
        // bisection on log(v): the root can be many orders below v_band
        for (int k = 0; k < 90; ++k) {
            const double mid = std::sqrt(lo * hi);
            (G(mid) < 0.0 ? lo : hi) = mid;
        }
        w[i] = std::sqrt(lo * hi);
    };

    // The achievable residual is limited by cancellation inside dt*Lap(v),
    // whose term magnitudes can exceed the solution scale by many orders;
    // the convergence test accounts for that floor.
    double floor_est = 0.0;
    double l2 = 0.0; // side channel: sum-of-squares of the last evaluation
    auto eval = [&](std::vector<double>& w, std::vector<double>& out) {
        if (opt.stats) ++opt.stats->residual_evals;
        for (int i = 0; i < ni; ++i) {
            if (w[i] < 0.0) w[i] = 0.0;
            if (w[i] <= v_band) node_solve(w, i);
        }
        double norm = 0.0;
        floor_est = 0.0;
        l2 = 0.0;
        for (int i = 0; i < ni; ++i) {
            const double t1 = xpow(w[i], inv_m);
            const double t2 = dt * lap.apply(w, i);
            const double t3 = rs[i] != 0.0 && w[i] > 0.0 ? rs[i] * xpow(w[i], qm) : 0.0;
            const double gi = t1 - t2 + t3 - state.u[i];
            out[i] = gi;
            norm = std::max(norm, std::abs(gi));
            l2 += gi * gi;
            const double mag = t1 + dt * (i == 0 ? lap.w_plus[0] * (w[1] + w[0])
                                                 : lap.w_plus[i] * (w[i + 1] + w[i]) +
                                                       lap.w_minus[i] * (w[i] + w[i - 1])) *
                                        lap.inv_dr2 +
                               t3 + state.u[i];
            floor_est = std::max(floor_est, 2.3e-16 * mag);
        }
        return norm;
    };

    auto finish = [&]() {
        RadialState next;
        next.grid = g;
        next.t = state.t + dt;
        next.v = std::move(v);
        next.v[ni] = 0.0;
        next.u.resize(n);
        for (int i = 0; i < n; ++i) {
            next.v[i] = std::max(next.v[i], 0.0);
            next.u[i] = std::pow(next.v[i], inv_m);
        }
        return next;
    };

    double norm = eval(v, resid);
    for (int it = 0; it < opt.max_newton; ++it) {
        if (norm <= std::max(tol, 10.0 * floor_est)) return finish();
        if (opt.stats) ++opt.stats->newton_iters;
        for (int i = 0; i < ni; ++i) {
            const double wi = std::max(v[i], eps);
            double d = inv_m * xpow(wi, inv_m - 1.0);
            d += dt * (i == 0 ? lap.w_plus[0] : lap.w_plus[i] + lap.w_minus[i]) * lap.inv_dr2;
            if (rs[i] != 0.0) d += rs[i] * qm * std::pow(wi, qm - 1.0);
            diag[i] = d;
            sub[i] = i > 0 ? -dt * lap.w_minus[i] * lap.inv_dr2 : 0.0;
            sup[i] = -dt * lap.w_plus[i] * lap.inv_dr2;
            rhs[i] = -resid[i];
        }
        sup[ni - 1] = 0.0; // neighbor ni is pinned at zero
        detail::solve_tridiag(sub, diag, sup, rhs);

        // damped update with clamping at zero; progress is judged in the
        // L2 norm, which tolerates transient wobble of individual nodes
        const double l2_cur = l2;
        double lambda = 1.0;
        std::vector<double> trial(n, 0.0);
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (int i = 0; i < ni; ++i) trial[i] = std::max(0.0, v[i] + lambda * rhs[i]);
            trial[ni] = 0.0;
            std::vector<double> tre(ni);
            const double trial_norm = eval(trial, tre);
            if (l2 < l2_cur || trial_norm <= std::max(tol, 10.0 * floor_est)) {
                v = std::move(trial);
                resid = std::move(tre);
                norm = trial_norm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
            trial.assign(n, 0.0);
        }
        if (!accepted) {
            // a stall within a small factor of the rounding floor is as
            // converged as double precision allows
            if (norm <= std::max(tol, 60.0 * floor_est)) return finish();
            throw Error(ErrorCode::NewtonDiverged,
                        "line search stalled at |G|=" + std::to_string(norm));
        }
    }
    throw Error(ErrorCode::NewtonDiverged,
                "no convergence in " + std::to_string(opt.max_newton) + " iterations");
}

// Largest node radius still carrying mass above the threshold.
inline double support_radius(const RadialState& state, double eps_supp) {
    if (!(eps_supp > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps_supp must be positive");
    for (int i = state.grid.n_nodes() - 1; i >= 0; --i)
        if (state.u[i] > eps_supp) return state.grid.r(i);
    return 0.0;
}

// Piecewise-linear view of the converged self-similar profile f*, extended
// by zero beyond the support edge.
struct ProfileStar {
    std::vector<double> xi, f;
    double xi0 = 0.0;
    double a_star = 0.0;
    double alpha = 0.0;
    double beta = 0.0;

    double operator()(double x) const {
        if (x <= 0.0) return f.front();
        if (x >= xi0) return 0.0;
        const auto it = std::upper_bound(xi.begin(), xi.end(), x);
        const std::size_t hi = static_cast<std::size_t>(it - xi.begin());
        if (hi == 0) return f.front();
        if (hi >= xi.size()) { // between the last sample and the edge
            const double x1 = xi.back(), f1 = f.back();
            return f1 * (xi0 - x) / (xi0 - x1);
        }
        const double w = (x - xi[hi - 1]) / (xi[hi] - xi[hi - 1]);
        return f[hi - 1] + w * (f[hi] - f[hi - 1]);
    }
};

inline ProfileStar make_profile_star(const ShootingResult& r, const Exponents& e) {
    ProfileStar ps;
    ps.xi0 = r.xi0_star;
    ps.a_star = r.a_star;
    ps.alpha = e.alpha;
    ps.beta = e.beta;
    ps.xi.push_back(0.0);
    ps.f.push_back(r.a_star);
    for (const auto& s : r.best_profile().samples) {
        if (s.xi <= ps.xi.back() || s.xi >= ps.xi0 || s.F <= 0.0) continue;
        ps.xi.push_back(s.xi);
        ps.f.push_back(std::pow(s.F, 1.0 / e.params.m));
    }
    return ps;
}

// t^alpha * max_i |u_i - t^{-alpha} f*(r_i t^beta)|
inline double rescaled_error(const RadialState& state, const ProfileStar& fstar) {
    if (!(state.t > 0.0))
        throw Error(ErrorCode::DomainError, "rescaled error needs t > 0");
    const double ta = std::pow(state.t, fstar.alpha);
    const double tb = std::pow(state.t, fstar.beta);
    double worst = 0.0;
    for (int i = 0; i < state.grid.n_nodes(); ++i) {
        const double target = fstar(state.grid.r(i) * tb) / ta;
        worst = std::max(worst, std::abs(state.u[i] - target));
    }
    return ta * worst;
}

struct DtPolicy {
    double dt = -1.0; // negative: use the grid spacing
    int max_halvings = 12;
};

struct TimePoint {
    double t = 0.0;
    double sup_norm = 0.0;
    double support_radius = 0.0;
    double origin_value = 0.0;
    double rescaled_error = std::numeric_limits<double>::quiet_NaN();
};

struct RunSummary {
    std::vector<TimePoint> series;
    int newton_retries = 0;
    std::size_t steps = 0;
};

// Advances the state to t_end, logging the observers at the requested times
// (plus t_end). dt halves on Newton failures, up to the policy limit.
inline RunSummary run(RadialState& state, double t_end, const DtPolicy& policy, const Params& p,
                      const SchemeOptions& opt = {}, std::vector<double> log_times = {},
                      const ProfileStar* fstar = nullptr, double eps_supp = -1.0,
                      const std::function<void(const RadialState&)>& on_log = nullptr) {
    if (!(t_end > state.t)) throw Error(ErrorCode::InvalidArgument, "t_end must exceed t");
    const double dt_base = policy.dt > 0.0 ? policy.dt : state.grid.dr();
    if (eps_supp <= 0.0) eps_supp = 1e-10 * std::max(state.sup(), 1e-300);

    std::sort(log_times.begin(), log_times.end());
    log_times.push_back(t_end);

    RunSummary summary;
    auto log_point = [&](const RadialState& s) {
        TimePoint tp;
        tp.t = s.t;
        tp.sup_norm = s.sup();
        tp.support_radius = support_radius(s, eps_supp);
        tp.origin_value = s.u[0];
        if (fstar && s.t > 0.0) tp.rescaled_error = rescaled_error(s, *fstar);
        summary.series.push_back(tp);
        if (on_log) on_log(s);
    };
    log_point(state);

    std::size_t next_log = 0;
    while (next_log < log_times.size() && log_times[next_log] <= state.t + 1e-14 * dt_base)
        ++next_log;

    while (state.t < t_end - 1e-12 * dt_base) {
        double target = t_end;
        if (next_log < log_times.size()) target = std::min(target, log_times[next_log]);
        double dt = std::min(dt_base, target - state.t);

        int halvings = 0;
        for (;;) {
            try {
                state = step_implicit(state, dt, p, opt);
                break;
            } catch (const Error& err) {
                if (err.code() != ErrorCode::NewtonDiverged || halvings >= policy.max_halvings)
                    throw;
                dt *= 0.5;
                ++halvings;
                ++summary.newton_retries;
            }
        }
        ++summary.steps;
        if (next_log < log_times.size() && state.t >= log_times[next_log] - 1e-12 * dt_base) {
            log_point(state);
            ++next_log;
        }
    }
    return summary;
}

// Comparison function W_R(t, x1) = (Y_R + Z_R)^{1/m} used to cut the support
// at distance 2R: Y_R = [A_R (x1-2R)^2]^{m/(m-q)}, Z_R = [B_R (T-t)]^{m/(1-q)}.
struct Supersolution {
    double R = 0.0;
    double T = 0.0;
    double A_R = 0.0;
    double B_R = 0.0;
};

inline Supersolution make_supersolution(const Params& p0, double sup_u0, double R, double T) {
    const Params p = validate(p0);
    if (!(sup_u0 > 0.0) || !(R > 0.0) || !(T > 0.0))
        throw Error(ErrorCode::InvalidArgument, "sup_u0, R, T must be positive");
    Supersolution s;
    s.R = R;
    s.T = T;
    s.A_R = (p.m - p.q) * (p.m - p.q) * std::pow(R, p.sigma) / (4.0 * p.m * (p.m + p.q));
    s.B_R = (1.0 - p.q) * std::pow(R, p.sigma) / 2.0;
    if (s.B_R * T < std::pow(sup_u0, 1.0 - p.q) * (1.0 - 1e-12))
        throw Error(ErrorCode::InvalidArgument, "initial-comparison condition fails: R < R(T)");
    if (s.A_R * R * R < std::pow(sup_u0, p.m - p.q) * (1.0 - 1e-12))
        throw Error(ErrorCode::InvalidArgument, "lateral-comparison condition fails: R < R(T)");
    return s;
}

// Evaluates L W = dW/dt - d^2(W^m)/dx1^2 + x1^sigma W^q on an open grid over
// (0,T) x (R, 2R) with exact derivatives; returns the minimum (a
// supersolution stays >= 0 up to rounding).
inline double supersolution_residual(const Params& p, const Supersolution& s, int nx = 64,
                                     int nt = 64) {
    const double mq = p.m - p.q;
    const double c_y = 2.0 * p.m * (p.m + p.q) / (mq * mq) * std::pow(s.A_R, p.m / mq);
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < nt; ++k) {
        const double t = (k + 0.5) * s.T / nt;
        const double zb = s.B_R * (s.T - t);
        const double Z = std::pow(zb, p.m / (1.0 - p.q));
        const double dZ = -s.B_R * p.m / (1.0 - p.q) * std::pow(zb, p.m / (1.0 - p.q) - 1.0);
        for (int j = 0; j < nx; ++j) {
            const double x1 = s.R + (j + 0.5) * s.R / nx;
            const double d = x1 - 2.0 * s.R;
            const double Y = std::pow(s.A_R * d * d, p.m / mq);
            const double WY = std::max(Y + Z, 1e-300);
            const double dWdt = (1.0 / p.m) * std::pow(WY, (1.0 - p.m) / p.m) * dZ;
            const double lapWm = c_y * std::pow(std::abs(d), 2.0 * p.q / mq);
            const double absw = std::pow(x1, p.sigma) * std::pow(WY, p.q / p.m);
            worst = std::min(worst, dWdt - lapWm + absw);
        }
    }
    return worst;
}

// Discrete residual of the explicit stationary solution U = A r^{(sigma+2)/(m-q)}
// under the scheme's radial operator, normalized by the residual scale at
// the outer radius. Second-order in dr away from the origin.
inline double stationary_residual(const Params& p, const Exponents& e, const RadialGrid& g) {
    const detail::RadialOperator lap(g, p.dim);
    const double pw = (p.sigma + 2.0) / (p.m - p.q);
    std::vector<double> vm(g.n_nodes());
    for (int i = 0; i < g.n_nodes(); ++i)
        vm[i] = std::pow(e.a_stat * std::pow(g.r(i), pw), p.m);
    const double scale_pow = (p.sigma * p.m + 2.0 * p.q) / (p.m - p.q);
    double worst = 0.0;
    for (int i = 1; i < g.n_nodes() - 1; ++i) {
        const double r = g.r(i);
        const double res =
            lap.apply(vm, i) -
            std::pow(r, p.sigma) * std::pow(e.a_stat * std::pow(r, pw), p.q);
        worst = std::max(worst, std::abs(res));
    }
    return worst / std::pow(g.r_max, scale_pow);
}

} // namespace pmia

#endif
