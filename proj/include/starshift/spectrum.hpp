#pragma once

#include <vector>

#include "starshift/graph_ops.hpp"

namespace starshift::spectrum {

using jost::JostOptions;
using jost::SpectralParam;
using potentials::StarGraph;

struct SpectrumOptions {
    JostOptions jost{};
    int grid_points = 400;         // initial kappa scan density
    int max_doublings = 4;         // scan refinement rounds before giving up
    double kappa_floor_rel = 1e-6; // lowest scanned kappa / kappa_max
    double bisect_tol = 1e-12;     // relative bracket width
    double dip_rel_tol = 1e-7;     // |P| at an extremum below this * local scale
                                   // counts as a double zero
    double dip_gray_factor = 1e3;  // ambiguous band above that -> GridTooCoarse
};

// Negative eigenvalues z = -kappa^2 listed by kappa, ascending, repeated with
// multiplicity.
struct NegativeSpectrum {
    std::vector<double> kappas;
    int count() const { return static_cast<int>(kappas.size()); }
    std::vector<double> eigenvalues() const; // ascending in energy
};

NegativeSpectrum count_negative_eigenvalues(const StarGraph& g,
                                            const SpectrumOptions& opt = {});

enum class ZeroEnergyCase {
    GenericNoResonance,            // all w_j(0) != 0, K(0) != 0        (m = 0)
    SingleZeroNoResonance,         // exactly one w_j(0) = 0, K singular (m = 0)
    ResonanceVanishingAtVertex,    // M >= 2 edge zeros                 (m = M-1)
    ResonanceNonvanishingAtVertex, // all w_j(0) != 0 but K(0) = 0      (m = 1)
};

struct ZeroEnergyClass {
    ZeroEnergyCase kind = ZeroEnergyCase::GenericNoResonance;
    int M = 0;           // # edges whose Jost function vanishes at zero energy
    int m = 0;           // resonance multiplicity
    bool k_singular = false;
    std::vector<double> w0, dw0;            // theta_j(0,0), theta_j'(0,0)
    std::vector<std::vector<double>> basis; // m resonance coefficient vectors
};

struct ClassifyOptions {
    JostOptions jost{};
    double zero_tol = 1e-6;     // scaled per edge by 1 + integral |V_j|
    double guard_factor = 10.0; // near-threshold data raises IllConditioned
};

ZeroEnergyClass classify_zero_energy(const StarGraph& g, const ClassifyOptions& opt = {});

// Zero energy may carry a resonance but never an L2 eigenfunction: every
// admissible zero-energy solution keeps a nonzero amplitude at infinity on
// some edge.  Verifies that on the computed resonance basis.
bool zero_energy_never_eigenvalue(const StarGraph& g, const ClassifyOptions& opt = {});

} // namespace starshift::spectrum
