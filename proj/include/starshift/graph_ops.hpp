#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "starshift/jost.hpp"

namespace starshift::graph_ops {

using jost::JostData;
using jost::JostOptions;
using jost::SpectralParam;
using potentials::StarGraph;

// Per-edge Jost boundary data at a common spectral parameter.
struct GraphJostData {
    SpectralParam p;
    std::vector<JostData> edges;
    double est_error = 0.0;
};

GraphJostData graph_jost(const StarGraph& g, SpectralParam p, const JostOptions& opt = {});

// K(zeta) = sum_j theta_j'(0)/theta_j(0).  Throws JostZero when an edge Jost
// function sits on (or numerically too close to) a zero.
std::complex<double> kirchhoff_sum(const GraphJostData& d);

// P(zeta) = sum_j theta_j'(0) prod_{k!=j} theta_k(0).  Equals K prod_j w_j but
// needs no quotients, so zeros of individual w_j are harmless.
std::complex<double> pole_free_sum(const GraphJostData& d);

// dP/dzeta assembled from the zeta-derivatives of the edge data.
std::complex<double> pole_free_sum_dot(const GraphJostData& d);

// Perturbation determinant D(z) = P(zeta) / (i n zeta), z = zeta^2.
std::complex<double> perturbation_determinant(const GraphJostData& d);
std::complex<double> perturbation_determinant(const StarGraph& g, SpectralParam p,
                                              const JostOptions& opt = {});

// tr(R0(z) - R(z)) = (1/(2 zeta)) (P'(zeta)/P(zeta) - 1/zeta).
std::complex<double> trace_resolvent_diff_formula(const GraphJostData& d);
std::complex<double> trace_resolvent_diff_formula(const StarGraph& g, SpectralParam p,
                                                  const JostOptions& opt = {});

// Resolvent kernel R(z) = (H - z)^{-1} evaluated on per-edge grids:
//   R_{jl}(x, y) = delta_{jl} phi_j(x ^ y) theta_j(x v y) / w_j
//                  - theta_j(x) theta_l(y) / (K w_j w_l).
class KreinKernel {
public:
    KreinKernel(const StarGraph& g, SpectralParam p, std::vector<std::vector<double>> grids,
                const JostOptions& opt = {});

    int n_edges() const { return static_cast<int>(grids_.size()); }
    const std::vector<double>& grid(int j) const { return grids_[j]; }
    std::complex<double> kirchhoff() const { return K_; }

    std::complex<double> value(int j, std::size_t ix, int l, std::size_t iy) const;
    // Row-major block of size grid(j).size() x grid(l).size().
    std::vector<std::complex<double>> block(int j, int l) const;

private:
    std::vector<std::vector<double>> grids_;
    std::vector<jost::SolutionOnGrid> theta_, phi_;
    std::vector<std::complex<double>> w_;
    std::complex<double> K_;
};

} // namespace starshift::graph_ops
