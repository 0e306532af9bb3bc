#ifndef PMIA_DOPRI5_HPP
#define PMIA_DOPRI5_HPP

// Adaptive Dormand-Prince 5(4) stepper with the classical 4th-order dense
// output (coefficients as in Hairer-Norsett-Wanner's DOPRI5). The dense
// interpolant over the last accepted step is what the event location in the
// profile integrator bisects on.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

namespace pmia {

template <std::size_t Dim>
class Dopri5 {
public:
    using State = std::array<double, Dim>;
    using Rhs = std::function<void(double, const State&, State&)>;

    struct Options {
        double rtol = 1e-10;
        double atol = 1e-14;
        double h_init = 1e-6;
        double h_max = 1.0;
        double h_min_factor = 1e-14; // underflow threshold, relative to |x|+1
        // Optional per-point cap on the step size (e.g. tail resolution
        // control); return +inf for "no cap".
        std::function<double(double, const State&)> max_step_fn;
    };

    Dopri5(Rhs rhs, Options opt) : rhs_(std::move(rhs)), opt_(opt) {}

    void start(double x0, const State& y0) {
        x_ = x0;
        y_ = y0;
        h_ = opt_.h_init;
        rhs_(x_, y_, k1_);
        ++n_eval_;
        have_step_ = false;
    }

    double x() const { return x_; }
    double x_prev() const { return x_prev_; }
    const State& y() const { return y_; }
    const State& y_prev() const { return y_prev_; }
    std::size_t evaluations() const { return n_eval_; }

    // Advance by one accepted step. Returns false when the step size
    // underflows (the caller decides how to report that).
    bool step() {
        const double hmin = opt_.h_min_factor * (std::abs(x_) + 1.0);
        double h = h_;
        if (opt_.max_step_fn) h = std::min(h, opt_.max_step_fn(x_, y_));
        h = std::min(h, opt_.h_max);

        for (int attempt = 0; attempt < 64; ++attempt) {
            if (!(h > hmin) || !std::isfinite(h)) return false;

            State k2, k3, k4, k5, k6, k7, yt, ynew, yerr;
            auto stage = [&](double c, const auto&... terms) {
                for (std::size_t i = 0; i < Dim; ++i) {
                    double acc = 0.0;
                    ((acc += terms.first * terms.second[i]), ...);
                    yt[i] = y_[i] + h * acc;
                }
                State k;
                rhs_(x_ + c * h, yt, k);
                ++n_eval_;
                return k;
            };
            using P = std::pair<double, const State&>;
            k2 = stage(1.0 / 5.0, P{1.0 / 5.0, k1_});
            k3 = stage(3.0 / 10.0, P{3.0 / 40.0, k1_}, P{9.0 / 40.0, k2});
            k4 = stage(4.0 / 5.0, P{44.0 / 45.0, k1_}, P{-56.0 / 15.0, k2}, P{32.0 / 9.0, k3});
            k5 = stage(8.0 / 9.0, P{19372.0 / 6561.0, k1_}, P{-25360.0 / 2187.0, k2},
                       P{64448.0 / 6561.0, k3}, P{-212.0 / 729.0, k4});
            k6 = stage(1.0, P{9017.0 / 3168.0, k1_}, P{-355.0 / 33.0, k2},
                       P{46732.0 / 5247.0, k3}, P{49.0 / 176.0, k4}, P{-5103.0 / 18656.0, k5});
            for (std::size_t i = 0; i < Dim; ++i)
                ynew[i] = y_[i] + h * (35.0 / 384.0 * k1_[i] + 500.0 / 1113.0 * k3[i] +
                                       125.0 / 192.0 * k4[i] - 2187.0 / 6784.0 * k5[i] +
                                       11.0 / 84.0 * k6[i]);
            rhs_(x_ + h, ynew, k7);
            ++n_eval_;

            double err = 0.0;
            for (std::size_t i = 0; i < Dim; ++i) {
                yerr[i] = h * (71.0 / 57600.0 * k1_[i] - 71.0 / 16695.0 * k3[i] +
                               71.0 / 1920.0 * k4[i] - 17253.0 / 339200.0 * k5[i] +
                               22.0 / 525.0 * k6[i] - 1.0 / 40.0 * k7[i]);
                const double sc =
                    opt_.atol + opt_.rtol * std::max(std::abs(y_[i]), std::abs(ynew[i]));
                const double r = yerr[i] / sc;
                err += r * r;
            }
            err = std::sqrt(err / static_cast<double>(Dim));

            if (!std::isfinite(err)) {
                h *= 0.25;
                continue;
            }
            if (err <= 1.0) {
                // Dense output coefficients for this step.
                for (std::size_t i = 0; i < Dim; ++i) {
                    const double ydiff = ynew[i] - y_[i];
                    const double bspl = h * k1_[i] - ydiff;
                    rc1_[i] = y_[i];
                    rc2_[i] = ydiff;
                    rc3_[i] = bspl;
                    rc4_[i] = ydiff - h * k7[i] - bspl;
                    rc5_[i] = h * (d1 * k1_[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                   d6 * k6[i] + d7 * k7[i]);
                }
                x_prev_ = x_;
                y_prev_ = y_;
                h_prev_ = h;
                x_ += h;
                y_ = ynew;
                k1_ = k7; // FSAL
                have_step_ = true;
                const double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                h_ = h * fac;
                return true;
            }
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
        }
        return false;
    }

    // Interpolate the solution inside the last accepted step.
    State dense(double xq) const {
        const double th = (xq - x_prev_) / h_prev_;
        const double th1 = 1.0 - th;
        State out;
        for (std::size_t i = 0; i < Dim; ++i)
            out[i] = rc1_[i] +
                     th * (rc2_[i] + th1 * (rc3_[i] + th * (rc4_[i] + th1 * rc5_[i])));
        return out;
    }

    bool have_step() const { return have_step_; }

private:
    static constexpr double d1 = -12715105075.0 / 11282082432.0;
    static constexpr double d3 = 87487479700.0 / 32700410799.0;
    static constexpr double d4 = -10690763975.0 / 1880347072.0;
    static constexpr double d5 = 701980252875.0 / 199316789632.0;
    static constexpr double d6 = -1453857185.0 / 822651844.0;
    static constexpr double d7 = 69997945.0 / 29380423.0;

    Rhs rhs_;
    Options opt_;
    double x_ = 0.0, x_prev_ = 0.0, h_ = 0.0, h_prev_ = 0.0;
    State y_{}, y_prev_{}, k1_{};
    State rc1_{}, rc2_{}, rc3_{}, rc4_{}, rc5_{};
    std::size_t n_eval_ = 0;
    bool have_step_ = false;
};

} // namespace pmia

#endif
