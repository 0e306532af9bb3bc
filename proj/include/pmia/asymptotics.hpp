#ifndef PMIA_ASYMPTOTICS_HPP
#define PMIA_ASYMPTOTICS_HPP

// Verification of the computed profile against its local laws near the edge
// of the support:
//
//   - tail fit of f against (xi0 - xi)^p with xi0 a free parameter, compared
//     with the closed-form exponent and amplitude for the regime,
//   - the three interface upper bounds,
//   - the phase-space trajectories (X, Y, Z)(eta) and their limits.

#include <algorithm>
#include <cmath>
#include <vector>

#include "pmia/errors.hpp"
#include "pmia/params.hpp"
#include "pmia/profile.hpp"

namespace pmia {

struct FitOptions {
    double window_lo = 1e-6; // window in f relative to a: f in [lo*a, hi*a]
    double window_hi = 1e-2;
    std::size_t min_samples = 30;
};

// Touchdown law f ~ amplitude * (xi0 - xi)^exponent for the regime.
inline double interface_exponent(const Params& p) {
    return regime_of(p) == Regime::HighSum ? 1.0 / (1.0 - p.q) : 2.0 / (p.m - p.q);
}

inline double interface_amplitude(const Exponents& e, double xi0) {
    const Params& p = e.params;
    switch (regime_of(p)) {
        case Regime::LowSum: return e.k1 * std::pow(xi0, p.sigma / (p.m - p.q));
        case Regime::Critical:
            return e.k1 * std::pow(xi0, p.sigma / (p.m - p.q)) *
                   e.k2(std::pow(xi0, (2.0 - p.sigma) / 2.0));
        case Regime::HighSum:
            return e.k3 * std::pow(xi0, (p.sigma - 1.0) / (1.0 - p.q));
    }
    return 0.0;
}

struct InterfaceFit {
    Regime regime = Regime::HighSum;
    double exponent_fit = 0.0;
    double exponent_theory = 0.0;
    double amplitude_fit = 0.0;
    double amplitude_theory = 0.0;
    double xi0 = 0.0; // fitted touchdown location
    std::pair<double, double> fit_window{0.0, 0.0};
    double r_squared = 0.0;
    std::size_t n_samples = 0;
};

namespace detail {

struct PowerLawFit {
    double log_amp;
    double exponent;
    double sse;
    double r2;
};

// Least squares of ln f = log_amp + p ln(xi0 - xi) for fixed xi0.
inline PowerLawFit fit_loglog(const std::vector<double>& xi, const std::vector<double>& lf,
                              double xi0) {
    const std::size_t n = xi.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(xi0 - xi[i]);
        sx += x;
        sy += lf[i];
        sxx += x * x;
        sxy += x * lf[i];
    }
    const double dn = static_cast<double>(n);
    const double det = dn * sxx - sx * sx;
    const double p = (dn * sxy - sx * sy) / det;
    const double c = (sy - p * sx) / dn;
    double sse = 0, sst = 0;
    const double ybar = sy / dn;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(xi0 - xi[i]);
        const double r = lf[i] - (c + p * x);
        sse += r * r;
        sst += (lf[i] - ybar) * (lf[i] - ybar);
    }
    return {c, p, sse, sst > 0 ? 1.0 - sse / sst : 1.0};
}

} // namespace detail

// Tail fit of the profile. xi0 is free: it is scanned and refined by golden
// section beyond the last sample (pinning it to the last sample would bias
// the exponent downward, the touchdown being asymptotic).
inline InterfaceFit fit_interface(const ProfileSolution& profile, const Exponents& e,
                                  const FitOptions& opt = {}) {
    const Params& p = e.params;
    const double a = profile.a;

    std::vector<double> xs, lfs;
    double xi_a = 0, xi_b = 0;
    for (const auto& s : profile.samples) {
        if (s.F <= 0.0) continue;
        const double f = std::pow(s.F, 1.0 / p.m);
        if (f >= opt.window_lo * a && f <= opt.window_hi * a) {
            if (xs.empty()) xi_a = s.xi;
            xi_b = s.xi;
            xs.push_back(s.xi);
            lfs.push_back(std::log(f));
        }
    }
    if (xs.size() < opt.min_samples)
        throw Error(ErrorCode::InsufficientTail,
                    "tail window holds " + std::to_string(xs.size()) + " samples, need " +
                        std::to_string(opt.min_samples));

    const double xi_last = xs.back();
    const double span = std::max(xi_last - xs.front(), 1e-12 * std::max(1.0, xi_last));

    // coarse scan of the offset xi0 - xi_last, then golden-section refinement
    auto sse_at = [&](double delta) { return detail::fit_loglog(xs, lfs, xi_last + delta).sse; };
    double best_delta = span * 1e-4;
    double best_sse = sse_at(best_delta);
    for (int k = 0; k < 64; ++k) {
        const double delta = span * std::pow(10.0, -9.0 + 9.5 * k / 63.0);
        const double s = sse_at(delta);
        if (s < best_sse) {
            best_sse = s;
            best_delta = delta;
        }
    }
    double lo = best_delta / 10.0, hi = best_delta * 10.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c1 = hi - gr * (hi - lo), c2 = lo + gr * (hi - lo);
    double f1 = sse_at(c1), f2 = sse_at(c2);
    for (int it = 0; it < 120; ++it) {
        if (f1 < f2) {
            hi = c2;
            c2 = c1;
            f2 = f1;
            c1 = hi - gr * (hi - lo);
            f1 = sse_at(c1);
        } else {
            lo = c1;
            c1 = c2;
            f1 = f2;
            c2 = lo + gr * (hi - lo);
            f2 = sse_at(c2);
        }
    }
    const double delta = 0.5 * (lo + hi);
    const double xi0 = xi_last + delta;
    const auto fit = detail::fit_loglog(xs, lfs, xi0);

    InterfaceFit out;
    out.regime = regime_of(p);
    out.exponent_fit = fit.exponent;
    out.amplitude_fit = std::exp(fit.log_amp);
    out.xi0 = xi0;
    out.fit_window = {xi_a, xi_b};
    out.r_squared = fit.r2;
    out.n_samples = xs.size();
    out.exponent_theory = interface_exponent(p);
    out.amplitude_theory = interface_amplitude(e, xi0);
    return out;
}

// Pointwise checks of the three interface upper bounds on (xi0/2, xi0):
//   |(f^{m-q})'| <= 2^{N-1} xi0^sigma (xi0 - xi)
//   f <= C1 (xi0-xi)^{2/(m-q)},  C1 = (2^{N-2} (m-q) xi0^sigma / m)^{1/(m-q)}
//   f <= C2 (xi0-xi)^{1/(1-q)},  C2 = (2^N xi0^{sigma-1} / beta)^{1/(1-q)}
struct BoundsReport {
    double worst_margin = 0.0; // min over samples and bounds of (rhs-lhs)/rhs
    std::size_t violations = 0;
    std::size_t samples_checked = 0;
    double tolerance = 1e-10;
};

inline BoundsReport interface_bounds_check(const ProfileSolution& profile, const Exponents& e,
                                           double xi0, double tolerance = 1e-10) {
    const Params& p = e.params;
    const double N = static_cast<double>(p.dim);
    const double c1 = std::pow(std::pow(2.0, N - 2.0) * (p.m - p.q) * std::pow(xi0, p.sigma) / p.m,
                               1.0 / (p.m - p.q));
    const double c2 = std::pow(std::pow(2.0, N) * std::pow(xi0, p.sigma - 1.0) / e.beta,
                               1.0 / (1.0 - p.q));
    BoundsReport rep;
    rep.tolerance = tolerance;
    rep.worst_margin = 1.0;
    for (const auto& s : profile.samples) {
        if (s.xi <= xi0 / 2.0 || s.xi >= xi0) continue;
        ++rep.samples_checked;
        const double d = xi0 - s.xi;
        const double f = s.F > 0.0 ? std::pow(s.F, 1.0 / p.m) : 0.0;
        // (f^{m-q})' = ((m-q)/m) F^{-q/m} F'
        const double deriv =
            s.F > 0.0 ? (p.m - p.q) / p.m * std::pow(s.F, -p.q / p.m) * std::abs(s.dF) : 0.0;
        const double rhs1 = std::pow(2.0, N - 1.0) * std::pow(xi0, p.sigma) * d;
        const double rhs2 = c1 * std::pow(d, 2.0 / (p.m - p.q));
        const double rhs3 = c2 * std::pow(d, 1.0 / (1.0 - p.q));
        for (auto [lhs, rhs] : {std::pair{deriv, rhs1}, std::pair{f, rhs2}, std::pair{f, rhs3}}) {
            const double margin = (rhs - lhs) / std::max(rhs, 1e-300);
            rep.worst_margin = std::min(rep.worst_margin, margin);
            if (margin < -tolerance) ++rep.violations;
        }
    }
    return rep;
}

enum class PhaseVariant { Low, High };

struct PhasePoint {
    double eta, X, Y, Z;
};

struct PhaseTrajectory {
    PhaseVariant variant = PhaseVariant::Low;
    std::vector<PhasePoint> samples;
    double y_star_theory = 0.0;
};

// Algebraic transform of the trajectory into phase-space coordinates; eta
// comes from the quadrature of its defining integral along the samples (with
// an analytic head for [0, xi_first]). xi0 enters only the critical-case
// limit value.
inline PhaseTrajectory phase_transform(const ProfileSolution& profile, const Exponents& e,
                                       PhaseVariant variant, double xi0 = 0.0) {
    const Params& p = e.params;
    const double m = p.m, q = p.q, sigma = p.sigma;
    const double sqm = std::sqrt(m);
    PhaseTrajectory out;
    out.variant = variant;

    const double a = profile.a;
    double eta = 0.0, prev_xi = 0.0, prev_integrand = 0.0;
    bool first = true;
    for (const auto& s : profile.samples) {
        if (s.F <= 0.0)
            throw Error(ErrorCode::DomainError, "phase transform requires f > 0 at all samples");
        const double f = std::pow(s.F, 1.0 / m);
        const double df = std::pow(s.F, (1.0 - m) / m) * s.dF / m;
        double X, Y, Z, integrand;
        if (variant == PhaseVariant::Low) {
            X = sqm * std::pow(s.xi, -(sigma + 2.0) / 2.0) * std::pow(f, (m - q) / 2.0);
            Y = sqm * std::pow(s.xi, -sigma / 2.0) * std::pow(f, (m - q - 2.0) / 2.0) * df;
            Z = e.alpha / sqm * std::pow(s.xi, (2.0 - sigma) / 2.0) *
                std::pow(f, (2.0 - m - q) / 2.0);
            integrand = std::pow(f, (q - m) / 2.0) * std::pow(s.xi, sigma / 2.0) / sqm;
            if (first)
                eta = std::pow(a, (q - m) / 2.0) / sqm * std::pow(s.xi, sigma / 2.0 + 1.0) /
                      (sigma / 2.0 + 1.0);
        } else {
            X = m / e.alpha * std::pow(s.xi, -2.0) * std::pow(f, m - 1.0);
            Y = m / e.alpha * std::pow(s.xi, -1.0) * std::pow(f, m - 2.0) * df;
            Z = m / (e.alpha * e.alpha) * std::pow(s.xi, sigma - 2.0) * std::pow(f, m + q - 2.0);
            integrand = e.alpha / m * s.xi / std::pow(f, m - 1.0);
            if (first)
                eta = e.alpha / m * s.xi * s.xi / (2.0 * std::pow(a, m - 1.0));
        }
        if (!first) eta += 0.5 * (integrand + prev_integrand) * (s.xi - prev_xi);
        out.samples.push_back({eta, X, Y, Z});
        prev_xi = s.xi;
        prev_integrand = integrand;
        first = false;
    }

    if (variant == PhaseVariant::High) {
        out.y_star_theory = 0.0;
    } else {
        double z_star = 0.0;
        if (regime_of(p) == Regime::Critical)
            z_star = e.alpha * std::pow(xi0, (2.0 - sigma) / 2.0) / sqm;
        const double r = e.beta / e.alpha * z_star;
        out.y_star_theory = (r - std::sqrt(r * r + 2.0 * (m + q))) / (m + q);
    }
    return out;
}

// Integral mean and standard deviation of Y over the final decade of eta.
struct PhaseTailStats {
    double mean = 0.0;
    double stdev = 0.0;
    double eta_lo = 0.0;
    double eta_hi = 0.0;
};

inline PhaseTailStats phase_tail_stats(const PhaseTrajectory& traj) {
    const double eta_hi = traj.samples.back().eta;
    const double eta_lo = eta_hi / 10.0;
    double w = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const auto& l = traj.samples[i - 1];
        const auto& r = traj.samples[i];
        if (r.eta < eta_lo) continue;
        const double dl = std::max(l.eta, eta_lo);
        const double dw = r.eta - dl;
        if (dw <= 0.0) continue;
        const double ymid = 0.5 * (l.Y + r.Y);
        w += dw;
        s1 += ymid * dw;
        s2 += ymid * ymid * dw;
    }
    PhaseTailStats st;
    st.eta_lo = eta_lo;
    st.eta_hi = eta_hi;
    if (w > 0.0) {
        st.mean = s1 / w;
        st.stdev = std::sqrt(std::max(0.0, s2 / w - st.mean * st.mean));
    }
    return st;
}

// H(xi) = xi^{N-1} F'(xi) - beta xi^N f(xi), interpolated on the trajectory.
// Vanishes at the origin and at the touchdown point of a tangential profile;
// negative in between for a decreasing profile.
inline double h_function(const ProfileSolution& profile, const Exponents& e, double xi) {
    if (xi == 0.0) return 0.0;
    if (profile.samples.empty() || xi < 0.0 || xi > profile.samples.back().xi)
        throw Error(ErrorCode::DomainError, "xi outside the trajectory range");
    const Params& p = e.params;
    const double F = interp_F(profile.samples, xi);
    const double dF = interp_dF(profile.samples, xi);
    const double f = F > 0.0 ? std::pow(F, 1.0 / p.m) : 0.0;
    const double N = static_cast<double>(p.dim);
    return std::pow(xi, N - 1.0) * dF - e.beta * std::pow(xi, N) * f;
}

} // namespace pmia

#endif
