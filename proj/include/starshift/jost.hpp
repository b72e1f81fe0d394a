#pragma once

#include <complex>
#include <span>
#include <vector>

#include "starshift/potentials.hpp"

namespace starshift::jost {

using potentials::EdgePotential;

// Spectral parameter zeta on the physical sheet: z = zeta^2 with
// Im zeta >= 0.  The real axis (both signs of k) is the continuous-spectrum
// boundary; the positive imaginary axis zeta = i*kappa covers z < 0.
struct SpectralParam {
    std::complex<double> zeta;

    static SpectralParam from_zeta(std::complex<double> zeta);
    // Principal-sheet square root: maps C \ [0, inf) into Im zeta > 0 and the
    // boundary values z = lambda +- i0 to +-sqrt(lambda).
    static SpectralParam from_z(std::complex<double> z);
    static SpectralParam from_k(double k) { return {std::complex<double>(k, 0.0)}; }

    std::complex<double> z() const { return zeta * zeta; }
};

struct JostOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double trunc_eps = 1e-12; // where to cut the potential tail
};

// Boundary data of the Jost solution theta(x, zeta) ~ exp(i zeta x):
//   w     = theta(0, zeta)            (Jost function)
//   dw    = theta'(0, zeta)           (space derivative)
//   wdot  = d/dzeta theta(0, zeta)
//   dwdot = d/dzeta theta'(0, zeta)
struct JostData {
    std::complex<double> w, dw, wdot, dwdot;
    double est_error = 0.0;
};

// w and dw only; cheaper when zeta-derivatives are not needed (root scans,
// phase curves).
struct JostValue {
    std::complex<double> w, dw;
    double est_error = 0.0;
};

JostData jost_boundary(const EdgePotential& V, SpectralParam p, const JostOptions& opt = {});
JostValue jost_w(const EdgePotential& V, SpectralParam p, const JostOptions& opt = {});

struct SolutionOnGrid {
    std::vector<double> x;
    std::vector<std::complex<double>> u, du;
    double est_error = 0.0;
};

// theta and theta' at the given ascending grid points (all >= 0).
SolutionOnGrid jost_solution(const EdgePotential& V, SpectralParam p,
                             std::span<const double> grid, const JostOptions& opt = {});

// Regular solution phi: phi(0) = 0, phi'(0) = 1, integrated outward.
SolutionOnGrid regular_solution(const EdgePotential& V, SpectralParam p,
                                std::span<const double> grid, const JostOptions& opt = {});

// Pointwise Wronskian a(x) b'(x) - a'(x) b(x); constant in x when both solve
// the same equation, and equal to the Jost function when a = theta, b = phi.
std::vector<std::complex<double>> wronskian(const SolutionOnGrid& a, const SolutionOnGrid& b);

} // namespace starshift::jost
