#ifndef PMIA_PROFILE_HPP
#define PMIA_PROFILE_HPP

// Integration and classification of self-similar profile trajectories.
//
// The trajectory F(.; a) of
//
//   F'' + (N-1)/xi F' + alpha F^{1/m} - beta xi (F^{1/m})'/1 - xi^sigma F^{q/m} = 0,
//   F(0) = a^m, F'(0) = 0,
//
// is advanced from a series-initialized point xi_init > 0 (the origin is a
// coordinate singularity) and stopped at the first of
//
//   - touchdown: F <= F_floor with F' < -slope_tol   -> class A,
//   - turning:   F' >= 0 with F > F_floor            -> class C (xi1 = first
//     zero of F', a strict local minimum),
//   - xi >= xi_max or a failed step                  -> Undecided.
//
// The same integrator core also runs the absorption-free comparison profile,
// the two limit equations (a -> 0 and a -> infinity) and the rescaled form
// of the equation used for cross-checks; they differ only in the constant in
// front of the linear terms and of the weight term.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "pmia/dopri5.hpp"
#include "pmia/errors.hpp"
#include "pmia/params.hpp"
#include "pmia/series.hpp"

namespace pmia {

enum class ProfileClass { A, C, Undecided };

inline const char* to_string(ProfileClass c) {
    switch (c) {
        case ProfileClass::A: return "A";
        case ProfileClass::C: return "C";
        case ProfileClass::Undecided: return "undecided";
    }
    return "?";
}

enum class Termination { HitZeroNegSlope, DerivativeVanished, MaxXiReached, StepFailure };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::HitZeroNegSlope: return "hit-zero-neg-slope";
        case Termination::DerivativeVanished: return "derivative-vanished";
        case Termination::MaxXiReached: return "max-xi-reached";
        case Termination::StepFailure: return "step-failure";
    }
    return "?";
}

struct ProfileSample {
    double xi;
    double F;
    double dF;
};

struct IntegrateOptions {
    // negative values mean "derive from a": xi_init = 1e-3 min(1, a^{(m-1)/2}),
    // F_floor = 1e-12 a^m, slope_tol = 1e-8 a^m, and xi_max sized to cover
    // both event locations, which scale like a^{(m-1)/2} (touchdown) and
    // a^{(m-q)/(sigma+2)} (turning point).
    double xi_init = -1.0;
    double xi_max = -1.0;
    double F_floor = -1.0;
    double slope_tol = -1.0;
    double rtol = 1e-10;
    double atol_factor = 1e-14; // atol = atol_factor * a^m
    double tail_step_frac = 0.2; // cap h at frac * F/|F'| on decreasing stretches
    double event_xi_rel_tol = 1e-12;
    bool detect_events = true;
    std::size_t max_steps = 2000000;
};

struct ProfileSolution {
    double a = 0.0;
    std::vector<ProfileSample> samples;
    std::optional<double> xi0; // first zero of F (touchdown point)
    std::optional<double> xi1; // first zero of F' before xi0
    ProfileClass cls = ProfileClass::Undecided;
    Termination termination = Termination::MaxXiReached;
    double F_floor = 0.0;
    double slope_tol = 0.0;
    double xi_init = 0.0;
    double rtol = 0.0;
};

struct PMEProfile {
    double a = 0.0;
    std::vector<ProfileSample> samples; // (xi, Phi, Phi')
};

namespace detail {

struct OdeCoeffs {
    double m, q, sigma;
    double N;
    double alpha_eff, beta_eff, c_abs;
};

// Semilinear right-hand side; the negative-power factor is clamped below at
// `clamp` so the final step may cross an A-event without overflowing. The
// clamped evaluation is only ever used to cross the event, crossing points
// reported as samples come from the dense interpolant.
inline void profile_rhs(const OdeCoeffs& c, double clamp, double xi,
                        const std::array<double, 2>& y, std::array<double, 2>& dy) {
    const double F = y[0], G = y[1];
    const double Fpos = std::max(F, 0.0);
    const double Fc = std::max(F, clamp);
    const double f = std::pow(Fpos, 1.0 / c.m);
    dy[0] = G;
    double dG = -c.alpha_eff * f;
    if (c.N > 1.0 && xi > 0.0) dG -= (c.N - 1.0) / xi * G;
    dG += (c.beta_eff / c.m) * xi * std::pow(Fc, (1.0 - c.m) / c.m) * G;
    if (c.c_abs != 0.0) dG += c.c_abs * std::pow(xi, c.sigma) * std::pow(Fpos, c.q / c.m);
    dy[1] = dG;
}

// Bisection for the first sign change of pick(dense(xi)) on [lo, hi].
template <typename Dense, typename Pick>
double bisect_event(const Dense& dense, Pick pick, double lo, double hi, double rel_tol) {
    double flo = pick(dense(lo));
    for (int it = 0; it < 200 && (hi - lo) > rel_tol * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = pick(dense(mid));
        if ((flo <= 0.0) == (fmid <= 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

inline ProfileSolution integrate_generic(const OdeCoeffs& c, double f0,
                                         const IntegrateOptions& opt_in) {
    if (!(f0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "initial value must be positive");
    IntegrateOptions opt = opt_in;
    const double F0 = std::pow(f0, c.m);
    if (opt.F_floor < 0.0) opt.F_floor = 1e-12 * F0;
    if (opt.slope_tol < 0.0) opt.slope_tol = 1e-8 * F0;
    if (opt.xi_init < 0.0) opt.xi_init = 1e-3 * std::min(1.0, std::pow(f0, (c.m - 1.0) / 2.0));
    if (opt.xi_max < 0.0)
        opt.xi_max = 50.0 * std::max({1.0, std::pow(f0, (c.m - 1.0) / 2.0),
                                      std::pow(f0, (c.m - c.q) / (c.sigma + 2.0))});

    const SeriesExpansion series = pmia::detail::build_series(
        c.m, c.q, c.sigma, static_cast<int>(c.N), c.alpha_eff, c.beta_eff, c.c_abs, f0);
    double xi0 = opt.xi_init;
    while (series.last_term_magnitude(xi0) > 1e-3 * F0 && xi0 > 1e-300) xi0 *= 0.5;
    auto [Fi, dFi] = series.eval(xi0);

    ProfileSolution sol;
    sol.a = f0;
    sol.F_floor = opt.F_floor;
    sol.slope_tol = opt.slope_tol;
    sol.xi_init = xi0;
    sol.rtol = opt.rtol;

    Dopri5<2>::Options sopt;
    sopt.rtol = opt.rtol;
    sopt.atol = opt.atol_factor * F0;
    sopt.h_init = 0.1 * xi0;
    sopt.h_max = std::max(0.5, opt.xi_max / 1000.0);
    const double frac = opt.tail_step_frac;
    const double floor = opt.F_floor;
    sopt.max_step_fn = [frac, floor](double, const std::array<double, 2>& y) {
        if (y[1] < 0.0 && y[0] > 0.0)
            return frac * std::max(y[0], floor) / (-y[1]);
        return std::numeric_limits<double>::infinity();
    };

    Dopri5<2> stepper(
        [&c, clamp = opt.F_floor](double xi, const std::array<double, 2>& y,
                                  std::array<double, 2>& dy) { profile_rhs(c, clamp, xi, y, dy); },
        sopt);
    stepper.start(xi0, {Fi, dFi});
    sol.samples.push_back({xi0, Fi, dFi});

    for (std::size_t n = 0; n < opt.max_steps; ++n) {
        if (stepper.x() >= opt.xi_max) {
            sol.cls = ProfileClass::Undecided;
            sol.termination = Termination::MaxXiReached;
            return sol;
        }
        if (!stepper.step()) {
            sol.cls = ProfileClass::Undecided;
            sol.termination = Termination::StepFailure;
            return sol;
        }

        if (opt.detect_events) {
            // scan the dense interpolant for the first touchdown (F = floor
            // going down) or turning point (F' = 0 going up) in this step
            const double xl = stepper.x_prev(), xr = stepper.x();
            auto dense = [&](double xq) { return stepper.dense(xq); };
            double prev_x = xl;
            auto prev_y = stepper.y_prev();
            constexpr int kScan = 8;
            for (int k = 1; k <= kScan; ++k) {
                const double xq = xl + (xr - xl) * k / kScan;
                const auto yq = k == kScan ? stepper.y() : stepper.dense(xq);
                const bool hit_floor = yq[0] <= opt.F_floor && prev_y[0] > opt.F_floor;
                const bool turned = yq[1] >= 0.0 && prev_y[1] < 0.0;
                if (hit_floor || turned) {
                    double xa = std::numeric_limits<double>::infinity();
                    double xc = std::numeric_limits<double>::infinity();
                    if (hit_floor)
                        xa = bisect_event(
                            dense, [&](const auto& y) { return y[0] - opt.F_floor; }, prev_x,
                            xq, opt.event_xi_rel_tol);
                    if (turned)
                        xc = bisect_event(
                            dense, [&](const auto& y) { return -y[1]; }, prev_x, xq,
                            opt.event_xi_rel_tol);
                    const double xe = std::min(xa, xc);
                    const auto ye = stepper.dense(xe);
                    sol.samples.push_back({xe, ye[0], ye[1]});
                    if (xa <= xc) {
                        // at the floor: class A needs a genuinely negative slope
                        if (ye[1] < -opt.slope_tol) {
                            sol.cls = ProfileClass::A;
                            sol.termination = Termination::HitZeroNegSlope;
                            sol.xi0 = xe;
                        } else {
                            sol.cls = ProfileClass::Undecided;
                            sol.termination = Termination::DerivativeVanished;
                            sol.xi0 = xe;
                        }
                    } else {
                        if (ye[0] > opt.F_floor) {
                            sol.cls = ProfileClass::C;
                            sol.termination = Termination::DerivativeVanished;
                            sol.xi1 = xe;
                        } else {
                            sol.cls = ProfileClass::Undecided;
                            sol.termination = Termination::DerivativeVanished;
                        }
                    }
                    return sol;
                }
                prev_x = xq;
                prev_y = yq;
            }
        }
        sol.samples.push_back({stepper.x(), stepper.y()[0], stepper.y()[1]});
    }
    sol.cls = ProfileClass::Undecided;
    sol.termination = Termination::MaxXiReached;
    return sol;
}

} // namespace detail

inline ProfileSolution integrate_profile(const Params& p, const Exponents& e, double a,
                                         const IntegrateOptions& opt = {}) {
    detail::OdeCoeffs c{p.m, p.q, p.sigma, static_cast<double>(p.dim), e.alpha, e.beta, 1.0};
    ProfileSolution s = detail::integrate_generic(c, a, opt);
    return s;
}

// Absorption-free comparison profile Phi_a (the plain diffusion profile with
// the same alpha, beta).
inline PMEProfile integrate_pme(const Params& p, const Exponents& e, double a,
                                const IntegrateOptions& opt = {}) {
    detail::OdeCoeffs c{p.m, p.q, p.sigma, static_cast<double>(p.dim), e.alpha, e.beta, 0.0};
    ProfileSolution s = detail::integrate_generic(c, a, opt);
    PMEProfile out;
    out.a = a;
    out.samples = std::move(s.samples);
    return out;
}

// Limit of the rescaled equation as a -> 0 (gamma = -(m-1)/2): the weight
// term drops out and the initial value is 1. The trajectory must reach a
// finite touchdown with negative slope.
inline ProfileSolution integrate_limit_h(const Params& p, const Exponents& e,
                                         const IntegrateOptions& opt = {}) {
    detail::OdeCoeffs c{p.m, p.q, p.sigma, static_cast<double>(p.dim), e.alpha, e.beta, 0.0};
    return detail::integrate_generic(c, 1.0, opt);
}

// Limit as a -> infinity (gamma = (q-m)/(sigma+2)): only the weight term
// survives; the solution is non-decreasing, so event detection is off and
// the trajectory runs to xi_max.
inline ProfileSolution integrate_limit_l(const Params& p, [[maybe_unused]] const Exponents& e,
                                         IntegrateOptions opt = {}) {
    opt.detect_events = false;
    if (opt.xi_max < 0.0) opt.xi_max = 3.0; // the solution grows fast; keep the range modest
    detail::OdeCoeffs c{p.m, p.q, p.sigma, static_cast<double>(p.dim), 0.0, 0.0, 1.0};
    return detail::integrate_generic(c, 1.0, opt);
}

// Rescaled form g(eta) = f(a^{-gamma} eta; a)/a. Classification of the
// rescaled trajectory must agree with that of f(.; a).
inline ProfileSolution integrate_rescaled(const Params& p, const Exponents& e, double a,
                                          double gamma, const IntegrateOptions& opt = {}) {
    const double c1 = std::pow(a, 1.0 - p.m - 2.0 * gamma);
    const double c2 = std::pow(a, p.q - p.m - gamma * (p.sigma + 2.0));
    detail::OdeCoeffs c{p.m,       p.q,          p.sigma, static_cast<double>(p.dim),
                        c1 * e.alpha, c1 * e.beta, c2};
    return detail::integrate_generic(c, 1.0, opt);
}

// Cubic Hermite interpolation on the recorded samples (value and slope are
// both stored, so the interpolant is C^1 and fourth-order accurate).
inline double interp_F(const std::vector<ProfileSample>& s, double xi) {
    if (s.empty()) throw Error(ErrorCode::DomainError, "empty trajectory");
    if (xi <= s.front().xi) return s.front().F;
    if (xi >= s.back().xi) return s.back().F;
    std::size_t lo = 0, hi = s.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (s[mid].xi <= xi ? lo : hi) = mid;
    }
    const double h = s[hi].xi - s[lo].xi;
    const double t = (xi - s[lo].xi) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * s[lo].F + (t3 - 2 * t2 + t) * h * s[lo].dF +
           (-2 * t3 + 3 * t2) * s[hi].F + (t3 - t2) * h * s[hi].dF;
}

inline double interp_dF(const std::vector<ProfileSample>& s, double xi) {
    if (s.empty()) throw Error(ErrorCode::DomainError, "empty trajectory");
    if (xi <= s.front().xi) return s.front().dF;
    if (xi >= s.back().xi) return s.back().dF;
    std::size_t lo = 0, hi = s.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (s[mid].xi <= xi ? lo : hi) = mid;
    }
    const double h = s[hi].xi - s[lo].xi;
    const double t = (xi - s[lo].xi) / h;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * s[lo].F + (3 * t2 - 4 * t + 1) * h * s[lo].dF +
            (-6 * t2 + 6 * t) * s[hi].F + (3 * t2 - 2 * t) * h * s[hi].dF) /
           h;
}

} // namespace pmia

#endif
