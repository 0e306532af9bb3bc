#ifndef PMIA_SHOOTING_HPP
#define PMIA_SHOOTING_HPP

// Locates the unique tangential-touchdown value a* of the shooting parameter
// a = f(0) by monotone bisection on the classification: trajectories with
// small a overshoot to zero (class A), trajectories with large a turn around
// at a positive minimum (class C), and a* sits between the two regimes.
// Bisection, not a secant iteration: the observable is a discrete class, not
// a smooth residual.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "pmia/asymptotics.hpp"
#include "pmia/errors.hpp"
#include "pmia/params.hpp"
#include "pmia/profile.hpp"

namespace pmia {

struct ShootingOptions {
    double a_seed = 1.0;
    double bracket_tol = 1e-10; // relative width at which bisection stops
    int max_doublings = 1000;
    int max_bisections = 300;
    IntegrateOptions integrate{};
    // the profile reported at a* is re-integrated with tightened tolerances
    double final_rtol = 1e-12;
    // two-sided refinement of the tail (see refine_tail below)
    bool refine = true;
    double seed_depth_factor = 1e-6; // backward seed at xi0 - factor*xi0
    // tail-fit window in relative interface depth (xi0 - xi)/xi0; the
    // touchdown law carries slowly decaying corrections, so the fit is
    // anchored at depths where they are small
    double fit_depth_lo = 3e-6;
    double fit_depth_hi = 3e-5;
};

// The forward trajectory cannot follow the tangential profile arbitrarily
// far down: ahead of the touchdown the linearized equation has a mode
// growing like exp(c/(xi0-xi)), so the deepest faithful point is set by the
// precision of a, not by the bracket width. Integrating *backward* from the
// interface turns that mode into a decaying one. refine_tail seeds the
// trajectory just below a trial interface point xi0 with the touchdown law,
// integrates backward into the bulk, and adjusts xi0 by a secant iteration
// until the value F at a mid-profile matching point agrees with the forward
// trajectory; the slope agreement at the matching point is not imposed and
// serves as the certificate that both trajectories are the same solution.
struct TailRefinement {
    bool valid = false;
    double xi0 = 0.0;            // matched interface location
    double match_xi = 0.0;       // mid-profile matching abscissa
    double match_value_rel = 0.0; // |F_b/F_f - 1| at the match (secant target)
    double match_slope_rel = 0.0; // |F'_b/F'_f - 1| at the match (certificate)
    ProfileSolution stitched;    // forward bulk + backward tail
};

struct IterationRecord {
    double a;
    ProfileClass cls;
    bool policy_resolved; // class assigned by the undecided-resolution policy
};

struct ShootingResult {
    double a_star = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    std::vector<IterationRecord> iterations;
    ProfileSolution profile;   // integrated at a_star
    double xi0_star = 0.0;     // support edge estimate
    double residual = 0.0;     // max(F, |F'|) at the last sample of `profile`
    bool undecided_policy_used = false;
    InterfaceFit fit;          // tail fit of the best available trajectory
    bool fit_valid = false;
    TailRefinement tail;       // two-sided tail (tail.valid marks success)

    // trajectory backing the asymptotics checks: the stitched two-sided
    // profile when available, the forward one otherwise
    const ProfileSolution& best_profile() const { return tail.valid ? tail.stitched : profile; }
};

namespace detail {

// Classify with the fallback ladder: tighten tolerances x10 up to twice,
// then decide by the slope at the last sample. Near a* both F and F' are
// tiny at the end of the trajectory and the slope sign is the best
// remaining discriminator.
inline std::pair<ProfileClass, bool> classify_resolved(const Params& p, const Exponents& e,
                                                       double a, const IntegrateOptions& base) {
    IntegrateOptions opt = base;
    for (int attempt = 0; attempt < 3; ++attempt) {
        const ProfileSolution s = integrate_profile(p, e, a, opt);
        if (s.cls != ProfileClass::Undecided) return {s.cls, attempt > 0};
        if (attempt == 2) {
            const double g = s.samples.empty() ? 0.0 : s.samples.back().dF;
            return {g < 0.0 ? ProfileClass::A : ProfileClass::C, true};
        }
        opt.rtol /= 10.0;
        opt.atol_factor /= 10.0;
    }
    return {ProfileClass::Undecided, true}; // unreachable
}

// Backward integration from the seeded interface point down to xi_end;
// returns the trajectory in descending xi (caller reverses).
inline std::vector<ProfileSample> integrate_backward(const Params& p, const Exponents& e,
                                                     double xi0_hat, double x_seed,
                                                     double xi_end, double scale_Fm) {
    const double pexp = interface_exponent(p);
    const double amp = interface_amplitude(e, xi0_hat);
    const double Fseed = std::pow(amp * std::pow(x_seed, pexp), p.m);
    const double Gseed = -p.m * pexp * std::pow(amp, p.m) * std::pow(x_seed, p.m * pexp - 1.0);

    const OdeCoeffs c{p.m, p.q, p.sigma, static_cast<double>(p.dim), e.alpha, e.beta, 1.0};
    const double xi_start = xi0_hat - x_seed;
    const double span = xi_start - xi_end;

    Dopri5<2>::Options sopt;
    sopt.rtol = 1e-12;
    sopt.atol = 1e-280 * std::max(1.0, scale_Fm);
    sopt.h_init = 1e-6 * x_seed;
    sopt.h_max = span / 16.0;
    sopt.max_step_fn = [x_seed](double s, const std::array<double, 2>&) {
        return 0.12 * (s + x_seed); // log-spaced resolution away from the interface
    };

    std::vector<ProfileSample> out;
    Dopri5<2> run(
        [&c, xi_start](double s, const std::array<double, 2>& y, std::array<double, 2>& dy) {
            std::array<double, 2> d;
            profile_rhs(c, 0.0, xi_start - s, y, d);
            dy[0] = -d[0];
            dy[1] = -d[1];
        },
        sopt);
    run.start(0.0, {Fseed, Gseed});
    out.push_back({xi_start, Fseed, Gseed});
    const double s_end = span;
    for (std::size_t n = 0; n < 400000; ++n) {
        if (!run.step())
            throw Error(ErrorCode::StepFailure, "backward tail integration failed");
        if (run.x() >= s_end) {
            const auto y = run.dense(s_end);
            out.push_back({xi_end, y[0], y[1]});
            return out;
        }
        out.push_back({xi_start - run.x(), run.y()[0], run.y()[1]});
    }
    throw Error(ErrorCode::StepFailure, "backward tail integration exceeded the step budget");
}

inline void check_monotone(const std::vector<IterationRecord>& log) {
    double largest_a_in_A = -1.0;
    double smallest_a_in_C = std::numeric_limits<double>::infinity();
    for (const auto& r : log) {
        if (r.cls == ProfileClass::A) largest_a_in_A = std::max(largest_a_in_A, r.a);
        if (r.cls == ProfileClass::C) smallest_a_in_C = std::min(smallest_a_in_C, r.a);
    }
    if (largest_a_in_A >= smallest_a_in_C)
        throw Error(ErrorCode::NonMonotoneClassification,
                    "a=" + std::to_string(largest_a_in_A) + " classified A above a=" +
                        std::to_string(smallest_a_in_C) + " classified C");
}

} // namespace detail

// Geometric search (x2 up / /2 down from a_seed) for a pair of values
// classified A below and C above.
inline std::pair<double, double> find_bracket(const Params& p, const Exponents& e, double a_seed,
                                              const ShootingOptions& opt = {},
                                              std::vector<IterationRecord>* log = nullptr) {
    if (!(a_seed > 0.0)) throw Error(ErrorCode::InvalidArgument, "a_seed must be positive");
    std::vector<IterationRecord> local;
    std::vector<IterationRecord>& rec = log ? *log : local;

    auto classify = [&](double a) {
        auto [cls, policy] = detail::classify_resolved(p, e, a, opt.integrate);
        rec.push_back({a, cls, policy});
        detail::check_monotone(rec);
        return cls;
    };

    double a_lo = -1.0, a_hi = -1.0;
    const ProfileClass seed_cls = classify(a_seed);
    if (seed_cls == ProfileClass::A)
        a_lo = a_seed;
    else
        a_hi = a_seed;

    // keep a^m and the trajectory magnitudes inside double range
    const double a_cap = std::pow(10.0, 220.0 / p.m);
    double up = a_seed, down = a_seed;
    for (int k = 0; k < opt.max_doublings && (a_lo < 0.0 || a_hi < 0.0); ++k) {
        if (a_hi < 0.0) {
            up *= 2.0;
            if (up > a_cap)
                throw Error(ErrorCode::BracketNotFound,
                            "no turning-point classification below the representable range");
            if (classify(up) == ProfileClass::C)
                a_hi = up;
            else
                a_lo = std::max(a_lo, up);
        } else {
            down *= 0.5;
            if (down < 1.0 / a_cap)
                throw Error(ErrorCode::BracketNotFound,
                            "no touchdown classification above the representable range");
            if (classify(down) == ProfileClass::A)
                a_lo = down;
            else
                a_hi = std::min(a_hi < 0.0 ? down : a_hi, down);
        }
    }
    if (a_lo < 0.0 || a_hi < 0.0)
        throw Error(ErrorCode::BracketNotFound,
                    "no A/C bracket within " + std::to_string(opt.max_doublings) + " doublings");
    return {a_lo, a_hi};
}

// Matches the backward trajectory to the forward one at a mid-profile point
// by adjusting the trial interface location.
inline TailRefinement refine_tail(const Params& p, const Exponents& e,
                                  const ProfileSolution& forward, double xi0_guess,
                                  double seed_depth_factor = 5e-5) {
    TailRefinement out;
    const double am = std::pow(forward.a, p.m);

    // matching sample: the first forward sample below half the center value
    std::size_t im = forward.samples.size();
    for (std::size_t i = 0; i < forward.samples.size(); ++i) {
        if (forward.samples[i].F <= 0.25 * am) {
            im = i;
            break;
        }
    }
    if (im == forward.samples.size() || im == 0) return out;
    const ProfileSample match = forward.samples[im];

    auto value_at_match = [&](double xi0_hat) {
        const auto traj = detail::integrate_backward(p, e, xi0_hat, seed_depth_factor * xi0_hat,
                                                     match.xi, am);
        return traj.back();
    };

    try {
        double x0 = xi0_guess;
        double x1 = xi0_guess * (1.0 + 1e-4);
        double g0 = std::log(value_at_match(x0).F / match.F);
        double g1 = std::log(value_at_match(x1).F / match.F);
        for (int it = 0; it < 80 && std::abs(g1) > 1e-13; ++it) {
            const double x2 = x1 - g1 * (x1 - x0) / (g1 - g0);
            if (!std::isfinite(x2) || x2 <= match.xi)
                return out;
            x0 = x1;
            g0 = g1;
            x1 = x2;
            g1 = std::log(value_at_match(x1).F / match.F);
        }
        if (std::abs(g1) > 1e-10) return out;

        auto tail = detail::integrate_backward(p, e, x1, seed_depth_factor * x1, match.xi, am);
        const ProfileSample end = tail.back();
        out.xi0 = x1;
        out.match_xi = match.xi;
        out.match_value_rel = std::abs(end.F / match.F - 1.0);
        out.match_slope_rel = std::abs(end.dF / match.dF - 1.0);

        out.stitched.a = forward.a;
        out.stitched.cls = forward.cls;
        out.stitched.termination = forward.termination;
        out.stitched.F_floor = forward.F_floor;
        out.stitched.slope_tol = forward.slope_tol;
        out.stitched.xi_init = forward.xi_init;
        out.stitched.rtol = forward.rtol;
        out.stitched.xi0 = x1;
        for (std::size_t i = 0; i < im; ++i) out.stitched.samples.push_back(forward.samples[i]);
        for (auto it = tail.rbegin(); it != tail.rend(); ++it)
            out.stitched.samples.push_back(*it);
        out.valid = true;
    } catch (const Error&) {
        out.valid = false;
    }
    return out;
}

inline ShootingResult solve(const Params& p, const Exponents& e, const ShootingOptions& opt = {}) {
    ShootingResult res;
    auto [a_lo, a_hi] = find_bracket(p, e, opt.a_seed, opt, &res.iterations);

    for (int it = 0; it < opt.max_bisections; ++it) {
        if (a_hi - a_lo <= opt.bracket_tol * 0.5 * (a_lo + a_hi)) break;
        const double mid = 0.5 * (a_lo + a_hi);
        auto [cls, policy] = detail::classify_resolved(p, e, mid, opt.integrate);
        res.iterations.push_back({mid, cls, policy});
        res.undecided_policy_used |= policy;
        detail::check_monotone(res.iterations);
        if (cls == ProfileClass::A)
            a_lo = mid;
        else
            a_hi = mid;
    }
    res.bracket = {a_lo, a_hi};
    res.a_star = 0.5 * (a_lo + a_hi);

    IntegrateOptions fin = opt.integrate;
    fin.rtol = std::min(opt.final_rtol, fin.rtol);
    fin.atol_factor = std::min(1e-16, fin.atol_factor);
    res.profile = integrate_profile(p, e, res.a_star, fin);

    // The reported profile should end at the tangential approach. A midpoint
    // that falls on the touchdown side ends in the post-departure crash,
    // where the slope is no longer meaningful; the turning-point side ends
    // at its positive minimum instead, which is the closest reliable
    // approach to the touchdown state. The flip point depends slightly on
    // the integration tolerances, so walk outward in units of the final
    // bracket width until the tight re-integration turns as well.
    if (res.profile.cls == ProfileClass::A) {
        const double w = std::max(a_hi - a_lo, res.a_star * 1e-15);
        for (int k = 1; k <= 65536 && res.profile.cls == ProfileClass::A; k *= 2) {
            ProfileSolution upper = integrate_profile(p, e, res.a_star + k * w, fin);
            if (upper.cls != ProfileClass::A) res.profile = std::move(upper);
        }
    }

    const auto& last = res.profile.samples.back();
    res.residual = std::max(std::abs(last.F), std::abs(last.dF));

    // The touchdown is asymptotic and never reached by the stepper; report
    // the support edge from the tail-fit extrapolation instead of the last
    // grid point, then sharpen it with the two-sided matching when enabled.
    double xi0_guess = res.profile.xi0.value_or(last.xi);
    try {
        res.fit = fit_interface(res.profile, e);
        res.fit_valid = true;
        xi0_guess = res.fit.xi0;
    } catch (const Error&) {
    }
    res.xi0_star = xi0_guess;

    if (opt.refine) {
        res.tail = refine_tail(p, e, res.profile, xi0_guess, opt.seed_depth_factor);
        if (res.tail.valid) {
            res.xi0_star = res.tail.xi0;
            // window placed by relative interface depth, translated to the
            // f-units of the fit options through the trajectory itself
            FitOptions fo;
            const auto& st = res.tail.stitched.samples;
            const double xi0 = res.tail.xi0;
            const double f_deep =
                std::pow(interp_F(st, xi0 * (1.0 - opt.fit_depth_lo)), 1.0 / p.m);
            const double f_shallow =
                std::pow(interp_F(st, xi0 * (1.0 - opt.fit_depth_hi)), 1.0 / p.m);
            fo.window_lo = f_deep / res.a_star;
            fo.window_hi = f_shallow / res.a_star;
            try {
                res.fit = fit_interface(res.tail.stitched, e, fo);
                res.fit_valid = true;
            } catch (const Error&) {
            }
        }
    }
    return res;
}

} // namespace pmia

#endif
