#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "starshift/potentials.hpp"

namespace starshift::oracle {

using potentials::EdgePotential;
using potentials::StarGraph;

// Lumped P1 finite elements on a uniform grid, mass-scaled so the operator is
// an exactly symmetric matrix: interior rows carry 2/h^2 + V, the shared
// vertex unknown carries 2/h^2 + mean_j V_j(0) and couples to each edge with
// -sqrt(2/n)/h^2.  Outer ends are Dirichlet.
struct DiscretizedGraph {
    int n = 0;           // edges
    bool has_vertex = false;
    int per_edge = 0;    // interior unknowns per edge, ordered away from the vertex
    double h = 0.0;      // actual spacing (L divided into whole steps)
    double L = 0.0;
    double vmax = 0.0;   // sup |V| over the edges
    std::vector<std::vector<double>> edge_diag; // diagonal entries per edge
    double vertex_diag = 0.0;
    Eigen::SparseMatrix<double> A;

    int size() const { return (has_vertex ? 1 : 0) + n * per_edge; }
    int index(int j, int i) const { // i = 1..per_edge counted from the vertex
        return (has_vertex ? 1 : 0) + j * per_edge + (i - 1);
    }
};

DiscretizedGraph discretize(const StarGraph& g, double L, double h);
// Single edge with Dirichlet conditions at both x = 0 and x = L.
DiscretizedGraph discretize_half_line(const EdgePotential& V, double L, double h);

// Inertia count #{eigenvalues < sigma} by LDL^T elimination along the tree
// (leaves first, vertex last).  Throws SingularShift on an exact pivot hit.
int count_below(const DiscretizedGraph& d, double sigma);

struct OracleSpectrum {
    int count = 0;
    std::vector<double> eigenvalues; // ascending, strictly below -delta_edge
    double delta_edge = 0.0;         // discretization noise band near zero
};

// Eigenvalues below -delta_edge (delta_edge = 10 h^2 max(1, sup|V|)) on one
// fixed mesh, by Sturm bisection.
OracleSpectrum oracle_eigencount(const DiscretizedGraph& d);

struct OracleOptions {
    double h = 0.005;
    double L = 0.0; // 0: from the potential support plus a decay margin
    std::size_t max_unknowns = 2'000'000;
};

// Convergence wrapper: box enlarged until the shallowest state fits, then
// (h, h/2) Richardson with count agreement across levels and an enlarged-box
// recount; disagreement raises NotConverged.
OracleSpectrum oracle_negative_spectrum(const StarGraph& g, const OracleOptions& opt = {});

// tr((A0 - z)^{-1} - (A - z)^{-1}) through the resolvent identity: both
// factorizations solved on the support of A - A0 only.
std::complex<double> oracle_trace_resolvent_diff(const DiscretizedGraph& d,
                                                 const DiscretizedGraph& d0,
                                                 std::complex<double> z);

// Fredholm-determinant discretization det(I_r + V (A0 - z)^{-1}) restricted
// to the grid points where V != 0; exactly 1 for V = 0.
std::complex<double> oracle_determinant(const DiscretizedGraph& d0, const StarGraph& g,
                                        std::complex<double> z);

// Trace norm of f (x) f* - g (x) g*: closed form
// sqrt((|f|^2 + |g|^2)^2 - 4 |(f,g)|^2) and, as a cross-check route, the
// singular-value sum of the explicit 2x2 representation on span{f, g}.
double rank2_trace_norm(std::span<const std::complex<double>> f,
                        std::span<const std::complex<double>> g);
double rank2_trace_norm_svd(std::span<const std::complex<double>> f,
                            std::span<const std::complex<double>> g);

struct DecayFit {
    std::vector<double> t, norm; // trace norms of R0(-t) - R(-t)
    double slope = 0.0;          // log-log least-squares exponent
    bool exact_zero = false;     // the perturbation vanishes on the grid
};

// Trace norms via the rank-factored difference R0 D R = X Y^T: QR both
// factors, singular values of the small core.  Requires sqrt(t) h < 0.1.
DecayFit trace_norm_decay(const DiscretizedGraph& d, const DiscretizedGraph& d0,
                          const std::vector<double>& t_list);

} // namespace starshift::oracle
