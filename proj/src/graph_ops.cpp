#include "starshift/graph_ops.hpp"

#include <algorithm>
#include <cmath>

namespace starshift::graph_ops {

namespace {
using std::complex;
constexpr complex<double> I{0.0, 1.0};

double jost_zero_threshold(const GraphJostData& d) {
    return 1e-8 * (1.0 + std::abs(d.p.zeta));
}
} // namespace

GraphJostData graph_jost(const StarGraph& g, SpectralParam p, const JostOptions& opt) {
    GraphJostData d;
    d.p = p;
    d.edges.reserve(g.edges.size());
    for (const auto& V : g.edges) {
        d.edges.push_back(jost::jost_boundary(V, p, opt));
        d.est_error += d.edges.back().est_error;
    }
    return d;
}

complex<double> kirchhoff_sum(const GraphJostData& d) {
    double thr = jost_zero_threshold(d);
    complex<double> K = 0.0;
    for (const auto& e : d.edges) {
        if (std::abs(e.w) <= thr)
            throw JostZero("edge Jost function vanishes; Kirchhoff sum has a pole");
        K += e.dw / e.w;
    }
    return K;
}

complex<double> pole_free_sum(const GraphJostData& d) {
    const auto n = d.edges.size();
    complex<double> P = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        complex<double> term = d.edges[j].dw;
        for (std::size_t k = 0; k < n; ++k)
            if (k != j) term *= d.edges[k].w;
        P += term;
    }
    return P;
}

complex<double> pole_free_sum_dot(const GraphJostData& d) {
    const auto n = d.edges.size();
    complex<double> Pdot = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        complex<double> t1 = d.edges[j].dwdot;
        for (std::size_t k = 0; k < n; ++k)
            if (k != j) t1 *= d.edges[k].w;
        Pdot += t1;
        for (std::size_t l = 0; l < n; ++l) {
            if (l == j) continue;
            complex<double> t2 = d.edges[j].dw * d.edges[l].wdot;
            for (std::size_t k = 0; k < n; ++k)
                if (k != j && k != l) t2 *= d.edges[k].w;
            Pdot += t2;
        }
    }
    return Pdot;
}

complex<double> perturbation_determinant(const GraphJostData& d) {
    if (d.p.zeta == 0.0)
        throw ZeroSpectralParam("perturbation determinant needs zeta != 0");
    double n = static_cast<double>(d.edges.size());
    return pole_free_sum(d) / (I * n * d.p.zeta);
}

complex<double> perturbation_determinant(const StarGraph& g, SpectralParam p,
                                         const JostOptions& opt) {
    return perturbation_determinant(graph_jost(g, p, opt));
}

complex<double> trace_resolvent_diff_formula(const GraphJostData& d) {
    if (d.p.zeta == 0.0)
        throw ZeroSpectralParam("resolvent trace formula needs zeta != 0");
    complex<double> P = pole_free_sum(d);
    double scale = 0.0;
    for (std::size_t j = 0; j < d.edges.size(); ++j) {
        double t = std::abs(d.edges[j].dw);
        for (std::size_t k = 0; k < d.edges.size(); ++k)
            if (k != j) t *= std::abs(d.edges[k].w);
        scale += t;
    }
    if (std::abs(P) <= 1e-13 * scale)
        throw EigenvalueHit("spectral point z is (numerically) an eigenvalue");
    complex<double> zeta = d.p.zeta;
    return (pole_free_sum_dot(d) / P - 1.0 / zeta) / (2.0 * zeta);
}

complex<double> trace_resolvent_diff_formula(const StarGraph& g, SpectralParam p,
                                             const JostOptions& opt) {
    return trace_resolvent_diff_formula(graph_jost(g, p, opt));
}

KreinKernel::KreinKernel(const StarGraph& g, SpectralParam p,
                         std::vector<std::vector<double>> grids, const JostOptions& opt)
    : grids_(std::move(grids)) {
    if (static_cast<int>(grids_.size()) != g.n())
        throw ValidationError("kernel needs one grid per edge");
    auto data = graph_jost(g, p, opt);
    K_ = kirchhoff_sum(data); // throws JostZero on a vanishing edge Jost function
    double kscale = 0.0;
    for (const auto& e : data.edges) kscale += std::abs(e.dw / e.w);
    if (std::abs(K_) <= 1e-12 * kscale)
        throw EigenvalueHit("resolvent kernel evaluated at an eigenvalue");
    for (int j = 0; j < g.n(); ++j) {
        w_.push_back(data.edges[j].w);
        theta_.push_back(jost::jost_solution(g.edges[j], p, grids_[j], opt));
        phi_.push_back(jost::regular_solution(g.edges[j], p, grids_[j], opt));
    }
}

complex<double> KreinKernel::value(int j, std::size_t ix, int l, std::size_t iy) const {
    complex<double> r = -theta_[j].u[ix] * theta_[l].u[iy] / (K_ * w_[j] * w_[l]);
    if (j == l) {
        std::size_t lo = std::min(ix, iy), hi = std::max(ix, iy);
        r += phi_[j].u[lo] * theta_[j].u[hi] / w_[j];
    }
    return r;
}

std::vector<complex<double>> KreinKernel::block(int j, int l) const {
    const auto& gx = grids_[j];
    const auto& gy = grids_[l];
    std::vector<complex<double>> out(gx.size() * gy.size());
    for (std::size_t ix = 0; ix < gx.size(); ++ix)
        for (std::size_t iy = 0; iy < gy.size(); ++iy)
            out[ix * gy.size() + iy] = value(j, ix, l, iy);
    return out;
}

} // namespace starshift::graph_ops
