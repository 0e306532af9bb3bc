#ifndef PMIA_SERIES_HPP
#define PMIA_SERIES_HPP

// Taylor expansion of the profile equation about the origin.
//
// Written for F = f^m, the profile equation
//
//   F'' + (N-1)/xi F' + alpha F^{1/m} - beta xi (F^{1/m})' - xi^sigma F^{q/m} = 0,
//   F(0) = a^m, F'(0) = 0,
//
// coincides, below order sigma, with the absorption-free equation, whose
// Taylor coefficients obey
//
//   B_{j+2} = (j beta - alpha) b_j / ((j+2)(N+j)),
//
// where b_j are the coefficients of f = F^{1/m}. The weight term first shows
// up at order sigma + 2 with coefficient a^q / ((sigma+2)(sigma+N)). The
// polynomial part stops at k0+2 (k0+3 when sigma is an integer), k0 being
// the largest integer strictly below sigma.
//
// The same machinery serves the rescaled and limit forms of the equation by
// scaling alpha, beta and the absorption coefficient.

#include <cmath>
#include <utility>
#include <vector>

#include "pmia/errors.hpp"
#include "pmia/params.hpp"

namespace pmia {

// Largest integer strictly below sigma. Integrality is detected with a
// 1e-12 absolute tolerance so that values like 2.0 + 1e-15 take the
// integer branch.
inline int sigma_k0(double sigma) {
    const double r = std::round(sigma);
    if (std::abs(sigma - r) < 1e-12) return static_cast<int>(r) - 1;
    return static_cast<int>(std::floor(sigma));
}

inline bool sigma_is_integer(double sigma) {
    return std::abs(sigma - std::round(sigma)) < 1e-12;
}

struct SeriesExpansion {
    double a = 0.0;                // f(0); equals F(0)^{1/m}
    std::vector<double> coeffs_B;  // B_0 .. B_J, J = k0+2 or k0+3
    std::vector<double> coeffs_b;  // matching coefficients of f = F^{1/m}
    double sigma_coeff = 0.0;      // coefficient of xi^{sigma+2}
    int k0 = 0;
    double sigma = 0.0;

    // F and F' of the truncated expansion.
    std::pair<double, double> eval(double xi) const {
        double F = 0.0, dF = 0.0, pw = 1.0;
        for (std::size_t j = 0; j < coeffs_B.size(); ++j) {
            F += coeffs_B[j] * pw;
            if (j + 1 < coeffs_B.size())
                dF += static_cast<double>(j + 1) * coeffs_B[j + 1] * pw;
            pw *= xi;
        }
        const double xs = std::pow(xi, sigma);
        F += sigma_coeff * xs * xi * xi;
        dF += (sigma + 2.0) * sigma_coeff * xs * xi;
        return {F, dF};
    }

    // Magnitude of the largest retained term at xi; used both as a crude
    // truncation estimate and for the divergence guard.
    double last_term_magnitude(double xi) const {
        const double poly = std::abs(coeffs_B.back()) *
                            std::pow(xi, static_cast<double>(coeffs_B.size() - 1));
        const double sig = std::abs(sigma_coeff) * std::pow(xi, sigma + 2.0);
        return std::max(poly, sig);
    }
};

namespace detail {

// Coefficients c_n of (1 + sum_{k>=1} P_k x^k)^p by the J.C.P. Miller
// recurrence: n c_n = sum_{k=1..n} ((p+1)k - n) P_k c_{n-k}.
inline double miller_next(const std::vector<double>& P, const std::vector<double>& c, double p) {
    const std::size_t n = c.size();
    double s = 0.0;
    for (std::size_t k = 1; k <= n && k < P.size() + 1; ++k) {
        const double Pk = (k < P.size()) ? P[k] : 0.0;
        s += ((p + 1.0) * static_cast<double>(k) - static_cast<double>(n)) * Pk * c[n - k];
    }
    return s / static_cast<double>(n);
}

// Generic builder. alpha_eff/beta_eff already carry any rescaling factor on
// the linear terms; c_abs scales the weight term.
inline SeriesExpansion build_series(double m, double q, double sigma, int dim, double alpha_eff,
                                    double beta_eff, double c_abs, double f0) {
    const int k0 = sigma_k0(sigma);
    const int top = k0 + (sigma_is_integer(sigma) ? 3 : 2);
    const double N = static_cast<double>(dim);
    const double F0 = std::pow(f0, m);

    SeriesExpansion s;
    s.a = f0;
    s.sigma = sigma;
    s.k0 = k0;
    s.sigma_coeff = c_abs * std::pow(f0, q) / ((sigma + 2.0) * (sigma + N));
    s.coeffs_B.assign(static_cast<std::size_t>(top) + 1, 0.0);
    s.coeffs_b.assign(static_cast<std::size_t>(top) + 1, 0.0);
    s.coeffs_B[0] = F0;
    s.coeffs_b[0] = f0;

    // Normalized series P_j = B_j / B_0 and c_j with f = f0 (1 + sum P)^{1/m}.
    std::vector<double> P{1.0}, c{1.0};
    for (int j = 0; j <= top - 2; ++j) {
        // b_j needs P_1..P_j, which previous iterations provided.
        while (static_cast<int>(c.size()) <= j) {
            c.push_back(miller_next(P, c, 1.0 / m));
            s.coeffs_b[c.size() - 1] = f0 * c.back();
        }
        const double bj = s.coeffs_b[static_cast<std::size_t>(j)];
        const double Bj2 = (static_cast<double>(j) * beta_eff - alpha_eff) * bj /
                           (static_cast<double>(j + 2) * (N + static_cast<double>(j)));
        s.coeffs_B[static_cast<std::size_t>(j) + 2] = Bj2;
        while (static_cast<int>(P.size()) <= j + 2) P.push_back(0.0);
        P[static_cast<std::size_t>(j) + 2] = Bj2 / F0;
    }
    while (static_cast<int>(c.size()) <= top) {
        c.push_back(miller_next(P, c, 1.0 / m));
        s.coeffs_b[c.size() - 1] = f0 * c.back();
    }
    return s;
}

} // namespace detail

// Expansion of the profile F(.; a) about xi = 0.
inline SeriesExpansion build_series(const Params& p, const Exponents& e, double a) {
    return detail::build_series(p.m, p.q, p.sigma, p.dim, e.alpha, e.beta, 1.0, a);
}

// Truncated series value (F, F') at xi_init, guarded against evaluation
// outside the heuristic convergence radius.
inline std::pair<double, double> series_init(const Params& p, const Exponents& e, double a,
                                             double xi_init) {
    if (!(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "a must be positive");
    if (xi_init < 0.0) throw Error(ErrorCode::InvalidArgument, "xi_init must be non-negative");
    const SeriesExpansion s = build_series(p, e, a);
    if (s.last_term_magnitude(xi_init) > 1e-3 * std::abs(s.coeffs_B[0]))
        throw Error(ErrorCode::SeriesDiverged, "xi_init exceeds the series radius heuristic");
    return s.eval(xi_init);
}

} // namespace pmia

#endif
