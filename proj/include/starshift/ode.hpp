#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "starshift/errors.hpp"

namespace starshift::ode {

struct Options {
    // atol is applied relative to the sup over state components, so error
    // control stays relative when the whole solution grows or decays
    // exponentially (Jost solutions on the imaginary axis do both).
    double rtol = 1e-10;
    double atol = 1e-12;
    long max_steps = 20'000'000;
};

template <std::size_t N>
using State = std::array<std::complex<double>, N>;

namespace detail {

// Dormand-Prince 5(4) tableau
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

template <std::size_t N>
double sup_abs(const State<N>& y) {
    double s = 0.0;
    for (const auto& v : y) s = std::max(s, std::abs(v));
    return s;
}

} // namespace detail

// Integrates dy/dx = f(x, y) from x0 to x1 (either direction).  on_node is
// fired at every forced node strictly between x0 and x1 and once at x1.
// Forced nodes double as breakpoints of f: the first/last stages of each step
// are evaluated a hair inside the current segment so that a discontinuity
// sitting exactly on a node is never sampled from the wrong side.
template <std::size_t N, class F, class Obs>
void integrate(F&& f, double x0, double x1, State<N>& y, const Options& opt,
               std::span<const double> forced_nodes, Obs&& on_node) {
    using namespace detail;
    if (x0 == x1) {
        on_node(x1, y);
        return;
    }
    const double dir = x1 > x0 ? 1.0 : -1.0;

    std::vector<double> targets;
    for (double xn : forced_nodes)
        if ((xn - x0) * dir > 0.0 && (x1 - xn) * dir > 0.0) targets.push_back(xn);
    std::sort(targets.begin(), targets.end());
    if (dir < 0.0) std::reverse(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end(),
                              [](double a, double b) {
                                  return std::abs(a - b) <=
                                         1e-14 * (std::abs(a) + std::abs(b));
                              }),
                  targets.end());
    targets.push_back(x1);

    State<N> k1, k2, k3, k4, k5, k6, k7, yt, ynew;
    double x = x0;
    double h_mag = 0.0;
    bool have_k1 = false;
    bool just_rejected = false;
    long steps = 0;

    for (double tgt : targets) {
        while ((tgt - x) * dir > 0.0) {
            double span = tgt - x;
            if (std::abs(span) <= 8.0 * 1e-16 * (1.0 + std::abs(x))) break;

            if (!have_k1) {
                f(x + 1e-10 * span, y, k1);
                have_k1 = true;
                if (h_mag == 0.0) {
                    double sy = sup_abs(y), sf = sup_abs(k1);
                    h_mag = sf > 1e-300 ? 0.01 * std::max(sy, opt.atol) / sf
                                        : std::abs(span);
                    h_mag = std::min(std::max(h_mag, 1e-8), std::abs(span));
                }
            }

            if (++steps > opt.max_steps)
                throw StiffnessFailure("integrator exceeded its step budget");

            bool hit = h_mag >= std::abs(span) * (1.0 - 1e-12);
            double hs = hit ? span : dir * h_mag;
            double nudge = 1e-10 * hs;

            for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (a21 * k1[i]);
            f(x + c2 * hs, yt, k2);
            for (std::size_t i = 0; i < N; ++i)
                yt[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
            f(x + c3 * hs, yt, k3);
            for (std::size_t i = 0; i < N; ++i)
                yt[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            f(x + c4 * hs, yt, k4);
            for (std::size_t i = 0; i < N; ++i)
                yt[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            f(x + c5 * hs, yt, k5);
            for (std::size_t i = 0; i < N; ++i)
                yt[i] = y[i] +
                        hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                              a65 * k5[i]);
            f(x + hs - nudge, yt, k6);
            for (std::size_t i = 0; i < N; ++i)
                ynew[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                                       b5 * k5[i] + b6 * k6[i]);
            f(x + hs - nudge, ynew, k7);

            double scale_sup = std::max(sup_abs(y), sup_abs(ynew));
            double err2 = 0.0;
            bool finite = std::isfinite(scale_sup);
            for (std::size_t i = 0; i < N && finite; ++i) {
                double e = std::abs(hs) *
                           std::abs(e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                    e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                double sc = opt.atol * std::max(scale_sup, 1e-300) +
                            opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                double q = e / std::max(sc, 1e-300);
                finite = std::isfinite(q);
                err2 += q * q;
            }
            double err = finite ? std::sqrt(err2 / N) : 1e10;

            if (err <= 1.0) {
                x = hit ? tgt : x + hs;
                y = ynew;
                k1 = k7;
                double grow = just_rejected ? 1.0 : 5.0;
                h_mag = std::abs(hs) *
                        std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, grow);
                just_rejected = false;
            } else {
                h_mag = std::abs(hs) *
                        std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
                just_rejected = true;
                if (h_mag < 1e-14 * (1.0 + std::abs(x)))
                    throw StiffnessFailure("step size underflow at x = " +
                                           std::to_string(x));
            }
        }
        x = tgt;
        have_k1 = false; // f may jump across the node; resample on the far side
        on_node(x, y);
    }
}

template <std::size_t N, class F>
void integrate(F&& f, double x0, double x1, State<N>& y, const Options& opt = {}) {
    integrate(
        std::forward<F>(f), x0, x1, y, opt, {},
        [](double, const State<N>&) {});
}

} // namespace starshift::ode
