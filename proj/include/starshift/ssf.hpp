#pragma once

#include <complex>
#include <vector>

#include "starshift/spectrum.hpp"

namespace starshift::ssf {

using jost::JostOptions;
using potentials::StarGraph;

struct SsfOptions {
    JostOptions jost{};
    spectrum::SpectrumOptions spectrum{};
    int curve_points = 600;       // log-spaced phase samples
    double lambda_min_rel = 1e-6; // curve foot, relative to the energy scale
    double lambda_max_rel = 1e4;  // curve top / branch anchor
    double anchor_margin = 0.3;   // |D - 1| must stay below this at the anchor
    int max_refine_depth = 20;    // bisection depth for phase hops > pi/2
    double quad_rtol = 1e-7;
    double quad_atol = 1e-12;
    int max_quad_segments = 4000;
    int fit_points = 5; // samples entering the threshold extrapolation
};

// Scattering phase eta(k) = arg D(k^2 + i0) along the positive real axis,
// unwrapped continuously and anchored by eta -> 0 at the top of the curve.
// xi(lambda) = eta(sqrt(lambda)) / pi for lambda > 0.
struct PhaseCurve {
    std::vector<double> k;   // ascending; refinement points included
    std::vector<double> eta; // continuous branch values
    double scale = 1.0;      // energy scale the grid was built from

    // Interpolated branch reference (log-linear inside, 1/k beyond the top).
    double eta_ref(double k) const;
};

PhaseCurve phase_curve(const StarGraph& g, const SsfOptions& opt = {});

// Exact xi at lambda > 0: recomputes the determinant there and picks the
// 2 pi branch closest to the interpolated curve.
double xi_at(const StarGraph& g, const PhaseCurve& c, double lambda,
             const SsfOptions& opt = {});

// xi(0+) from a least-squares a + b k fit on the lowest curve samples.
double xi_zero_plus(const PhaseCurve& c, int fit_points = 5);

// Least-squares slope of log|D| against log kappa on zeta = i kappa just
// below zero energy; equals m - 1 with m the resonance multiplicity.
double low_energy_exponent(const StarGraph& g, const SsfOptions& opt = {});

struct LevinsonResult {
    double xi0 = 0.0;      // xi(0+)
    int bound_states = 0;  // N, counted with multiplicity
    int multiplicity = 0;  // zero-energy resonance multiplicity m
    double residual = 0.0; // xi0 + N + (m - 1) / 2, zero in exact arithmetic
};

LevinsonResult levinson_check(const StarGraph& g, const SsfOptions& opt = {});

struct DispersionResult {
    std::complex<double> lhs, rhs;
    double residual = 0.0; // |lhs - rhs| / max(1, |lhs|)
};

// tr(R0 - R)(z) against int xi(lambda) (lambda - z)^{-2} dlambda over the
// whole spectrum: exact steps on the negative axis, adaptive Gauss-Kronrod
// on the curve, 1/sqrt(lambda) tail model beyond the anchor.
DispersionResult dispersion_check(const StarGraph& g, std::complex<double> z,
                                  const SsfOptions& opt = {});

// Same identity tested against f(l) = (l - z1)^{-1} - (l - z2)^{-1}:
// tr(f(H) - f(H0)) = int xi(lambda) f'(lambda) dlambda.
DispersionResult trace_test_function_check(const StarGraph& g, std::complex<double> z1,
                                           std::complex<double> z2,
                                           const SsfOptions& opt = {});

} // namespace starshift::ssf
