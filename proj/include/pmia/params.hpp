#ifndef PMIA_PARAMS_HPP
#define PMIA_PARAMS_HPP

// Parameters and closed-form constants for the porous medium equation with
// spatially weighted strong absorption,
//
//     u_t = Laplace(u^m) - |x|^sigma u^q,   m > 1,  0 < q < 1,
//
// restricted to the weight range sigma > 2(1-q)/(m-1) in which supports
// shrink instantly but the solution never goes extinct. Everything downstream
// (profile ODE, shooting, PDE runs) reads its constants from here.

#include <cmath>
#include <sstream>

#include "pmia/errors.hpp"

namespace pmia {

struct Params {
    double m = 2.0;     // diffusion exponent
    double q = 0.5;     // absorption exponent
    double sigma = 2.0; // absorption weight exponent
    int dim = 1;        // space dimension N

    double sigma_threshold() const { return 2.0 * (1.0 - q) / (m - 1.0); }
};

// Validates the admissible region; returns the params unchanged on success.
inline Params validate(const Params& p) {
    std::ostringstream msg;
    if (!(p.m > 1.0)) {
        msg << "m <= 1 (m = " << p.m << ")";
        throw Error(ErrorCode::OutOfRange, msg.str());
    }
    if (!(p.q > 0.0 && p.q < 1.0)) {
        msg << "q outside (0,1) (q = " << p.q << ")";
        throw Error(ErrorCode::OutOfRange, msg.str());
    }
    if (!(p.sigma > p.sigma_threshold())) {
        msg << "sigma <= 2(1-q)/(m-1) (sigma = " << p.sigma
            << ", threshold = " << p.sigma_threshold() << ")";
        throw Error(ErrorCode::OutOfRange, msg.str());
    }
    if (p.dim < 1) {
        msg << "dim < 1 (dim = " << p.dim << ")";
        throw Error(ErrorCode::OutOfRange, msg.str());
    }
    return p;
}

inline bool is_admissible(const Params& p) {
    return p.m > 1.0 && p.q > 0.0 && p.q < 1.0 && p.sigma > p.sigma_threshold() && p.dim >= 1;
}

// Interface regime, decided by the sign of m + q - 2. The split is detected
// with absolute tolerance 1e-12; nearby parameters keep their exact regime.
enum class Regime { LowSum, Critical, HighSum };

inline Regime regime_of(const Params& p) {
    const double s = p.m + p.q - 2.0;
    if (std::abs(s) < 1e-12) return Regime::Critical;
    return s < 0.0 ? Regime::LowSum : Regime::HighSum;
}

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::LowSum: return "low-sum";
        case Regime::Critical: return "critical";
        case Regime::HighSum: return "high-sum";
    }
    return "?";
}

// Derived self-similarity exponents and the interface/decay constants.
//
//   alpha = (sigma+2) / (sigma(m-1) + 2(q-1))      time decay
//   beta  = (m-q)     / (sigma(m-1) + 2(q-1))      space scaling
//
// k1, k2(z), k3 govern the profile's touchdown behaviour, a_stat is the
// amplitude of the explicit stationary solution A r^{(sigma+2)/(m-q)}, and
// gamma_small/gamma_large are the two rescaling exponents that send the
// profile equation to its small-a and large-a limit forms.
struct Exponents {
    Params params;
    double alpha = 0.0;
    double beta = 0.0;
    double k1 = 0.0;
    double k3 = 0.0;
    double a_stat = 0.0;
    double gamma_small = 0.0;
    double gamma_large = 0.0;

    double k2(double z) const {
        const double m = params.m, q = params.q;
        const double s = std::sqrt(2.0 * m * (m + q));
        const double t = beta * z / s;
        return std::pow(std::sqrt(1.0 + t * t) - t, 2.0 / (m - q));
    }
};

inline Exponents exponents(const Params& p0) {
    const Params p = validate(p0);
    const double m = p.m, q = p.q, sigma = p.sigma;
    const double N = static_cast<double>(p.dim);
    const double denom = sigma * (m - 1.0) + 2.0 * (q - 1.0);

    Exponents e;
    e.params = p;
    e.alpha = (sigma + 2.0) / denom;
    e.beta = (m - q) / denom;
    e.k1 = std::pow((m - q) / std::sqrt(2.0 * m * (m + q)), 2.0 / (m - q));
    e.k3 = std::pow((1.0 - q) / e.beta, 1.0 / (1.0 - q));
    e.a_stat = std::pow((m - q) * (m - q) /
                            (m * (sigma + 2.0) * (m * (sigma + N) - q * (N - 2.0))),
                        1.0 / (m - q));
    e.gamma_small = -(m - 1.0) / 2.0;
    e.gamma_large = (q - m) / (sigma + 2.0);
    return e;
}

// Radius R(T) outside which a bounded solution with sup u0 = sup_u0 has
// vanished by time T; the support of u(t) stays inside B(0, 2 R(T)) for
// t >= T. Non-increasing in T (the second branch does not depend on T).
inline double shrinking_radius(const Params& p0, double sup_u0, double T) {
    const Params p = validate(p0);
    if (!(sup_u0 > 0.0))
        throw Error(ErrorCode::InvalidArgument, "sup_u0 must be positive");
    if (!(T > 0.0))
        throw Error(ErrorCode::InvalidArgument, "T must be positive");
    const double m = p.m, q = p.q, sigma = p.sigma;
    const double r1 = std::pow(2.0 * std::pow(sup_u0, 1.0 - q) / ((1.0 - q) * T), 1.0 / sigma);
    const double r2 = std::pow(4.0 * m * (m + q) * std::pow(sup_u0, m - q) / ((m - q) * (m - q)),
                               1.0 / (sigma + 2.0));
    return std::max(r1, r2);
}

} // namespace pmia

#endif
