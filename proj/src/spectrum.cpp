#include "starshift/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>

namespace starshift::spectrum {

namespace {

using std::complex;
using potentials::EdgePotential;

// On the imaginary axis zeta = i kappa the edge data are real (up to exact
// zeros in the imaginary parts), so the pole-free sum is a real function of
// kappa and sign scans are meaningful.
struct Scanner {
    const StarGraph* g;
    JostOptions jopt;

    double P(double kappa) const {
        SpectralParam p{complex<double>(0.0, kappa)};
        std::vector<jost::JostValue> e;
        e.reserve(g->edges.size());
        for (const auto& V : g->edges) e.push_back(jost::jost_w(V, p, jopt));
        double acc = 0.0;
        for (std::size_t j = 0; j < e.size(); ++j) {
            double t = std::real(e[j].dw);
            for (std::size_t k = 0; k < e.size(); ++k)
                if (k != j) t *= std::real(e[k].w);
            acc += t;
        }
        return acc;
    }

    // dP/dkappa = i * dP/dzeta on zeta = i kappa (real-valued there)
    double dP(double kappa) const {
        SpectralParam p{complex<double>(0.0, kappa)};
        auto d = graph_ops::graph_jost(*g, p, jopt);
        return std::real(complex<double>(0.0, 1.0) * graph_ops::pole_free_sum_dot(d));
    }
};

double bisect(const std::function<double(double)>& f, double a, double b, double fa,
              double rel_tol) {
    for (int i = 0; i < 200 && (b - a) > rel_tol * (1.0 + b); ++i) {
        double mid = 0.5 * (a + b);
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if (fa * fm < 0.0) {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    return 0.5 * (a + b);
}

struct ScanResult {
    std::vector<double> kappas; // with multiplicity
};

ScanResult scan_once(const Scanner& sc, double kmax, const SpectrumOptions& opt,
                     int n_points) {
    // log grid from kmax down to the floor, plus kmax itself; the fractional
    // offset keeps symmetric configurations from parking roots on grid nodes
    std::vector<double> ks{kmax};
    double lf = std::log(opt.kappa_floor_rel);
    for (int i = 0; i < n_points; ++i)
        ks.push_back(kmax * std::exp(lf * (i + 0.2137) / n_points));
    std::vector<double> fs(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) fs[i] = sc.P(ks[i]);

    // ks is descending; work in ascending order for output convenience
    std::reverse(ks.begin(), ks.end());
    std::reverse(fs.begin(), fs.end());

    auto f = [&](double k) { return sc.P(k); };
    ScanResult out;

    double fscale = 0.0;
    for (double v : fs) fscale = std::max(fscale, std::abs(v));

    for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
        if (fs[i] == 0.0) continue; // treated by its neighbours
        if (fs[i] * fs[i + 1] < 0.0) {
            double root = bisect(f, ks[i], ks[i + 1], fs[i], opt.bisect_tol);
            // an odd zero with a flat derivative is a (at least) triple zero
            double secant = std::abs(fs[i + 1] - fs[i]) / (ks[i + 1] - ks[i]);
            int mult = std::abs(sc.dP(root)) < 1e-4 * secant ? 3 : 1;
            for (int q = 0; q < mult; ++q) out.kappas.push_back(root);
        }
    }

    // dips: local minima of |P| without a sign change can hide an even-order
    // zero; locate the extremum through dP and test the residual there
    for (std::size_t i = 1; i + 1 < ks.size(); ++i) {
        if (fs[i - 1] * fs[i] < 0.0 || fs[i] * fs[i + 1] < 0.0) continue;
        if (std::abs(fs[i]) >= std::abs(fs[i - 1]) ||
            std::abs(fs[i]) > std::abs(fs[i + 1]))
            continue;
        double ga = sc.dP(ks[i - 1]), gb = sc.dP(ks[i + 1]);
        if (ga * gb >= 0.0) continue; // shoulder, not an extremum
        double kext = bisect([&](double k) { return sc.dP(k); }, ks[i - 1], ks[i + 1],
                             ga, opt.bisect_tol);
        double S = std::max({std::abs(fs[i - 1]), std::abs(fs[i + 1]), 1e-14 * fscale});
        double res = std::abs(f(kext));
        if (res <= opt.dip_rel_tol * S) {
            out.kappas.push_back(kext);
            out.kappas.push_back(kext);
        } else if (res <= opt.dip_gray_factor * opt.dip_rel_tol * S) {
            throw GridTooCoarse("near-degenerate pair of eigenvalues at kappa = " +
                                std::to_string(kext) +
                                "; raise grid_points to separate them");
        }
    }

    std::sort(out.kappas.begin(), out.kappas.end());
    return out;
}

} // namespace

std::vector<double> NegativeSpectrum::eigenvalues() const {
    std::vector<double> e;
    e.reserve(kappas.size());
    for (auto it = kappas.rbegin(); it != kappas.rend(); ++it) e.push_back(-*it * *it);
    return e;
}

NegativeSpectrum count_negative_eigenvalues(const StarGraph& g,
                                            const SpectrumOptions& opt) {
    double sup = 0.0;
    for (const auto& V : g.edges) sup = std::max(sup, V.sup_abs());
    if (sup == 0.0) return {};
    double kmax = std::sqrt(sup) * (1.0 + 1e-9);

    Scanner sc{&g, opt.jost};
    ScanResult prev = scan_once(sc, kmax, opt, opt.grid_points);
    int n = opt.grid_points;
    for (int round = 0; round < opt.max_doublings; ++round) {
        n *= 2;
        ScanResult next = scan_once(sc, kmax, opt, n);
        if (next.kappas.size() == prev.kappas.size()) return {std::move(next.kappas)};
        prev = std::move(next);
    }
    throw GridTooCoarse("eigenvalue count failed to stabilise under grid refinement");
}

ZeroEnergyClass classify_zero_energy(const StarGraph& g, const ClassifyOptions& opt) {
    SpectralParam p{0.0};
    ZeroEnergyClass r;
    std::vector<int> zero_edges;
    for (int j = 0; j < g.n(); ++j) {
        auto e = jost::jost_w(g.edges[j], p, opt.jost);
        double w = std::real(e.w), dw = std::real(e.dw);
        r.w0.push_back(w);
        r.dw0.push_back(dw);
        double tol = opt.zero_tol * (1.0 + g.edges[j].moment(0));
        if (std::abs(w) > tol / opt.guard_factor && std::abs(w) < tol * opt.guard_factor)
            throw IllConditioned("edge " + std::to_string(j) +
                                 " Jost function at zero energy sits on the decision "
                                 "boundary; perturb the potential or tolerances");
        if (std::abs(w) <= tol) zero_edges.push_back(j);
    }
    r.M = static_cast<int>(zero_edges.size());

    if (r.M == 0) {
        double K0 = 0.0, kscale = 0.0;
        for (int j = 0; j < g.n(); ++j) {
            K0 += r.dw0[j] / r.w0[j];
            kscale += (1.0 + std::abs(r.dw0[j])) / std::abs(r.w0[j]);
        }
        double ktol = opt.zero_tol * kscale;
        if (std::abs(K0) > ktol / opt.guard_factor && std::abs(K0) < ktol * opt.guard_factor)
            throw IllConditioned(
                "Kirchhoff sum at zero energy sits on the decision boundary");
        if (std::abs(K0) <= ktol) {
            r.kind = ZeroEnergyCase::ResonanceNonvanishingAtVertex;
            r.m = 1;
            // resonance profile theta_j / w_j: continuous at the vertex by
            // construction, currents cancel because K(0) = 0
            std::vector<double> c(g.n());
            double nrm = 0.0;
            for (int j = 0; j < g.n(); ++j) {
                c[j] = 1.0 / r.w0[j];
                nrm = std::max(nrm, std::abs(c[j]));
            }
            for (auto& v : c) v /= nrm;
            r.basis.push_back(std::move(c));
        } else {
            r.kind = ZeroEnergyCase::GenericNoResonance;
        }
        return r;
    }

    if (r.M == 1) {
        r.kind = ZeroEnergyCase::SingleZeroNoResonance;
        r.k_singular = true;
        return r;
    }

    // M >= 2: resonances vanish at the vertex and live on the zero edges;
    // the only constraint left is current conservation.
    r.kind = ZeroEnergyCase::ResonanceVanishingAtVertex;
    r.k_singular = true;
    r.m = r.M - 1;
    for (int j : zero_edges)
        if (std::abs(r.dw0[j]) <= opt.zero_tol)
            throw IllConditioned("degenerate boundary data on edge " + std::to_string(j));
    int j0 = zero_edges.front();
    for (int i = 1; i < r.M; ++i) {
        std::vector<double> c(g.n(), 0.0);
        int ji = zero_edges[i];
        c[j0] = 1.0 / r.dw0[j0];
        c[ji] = -1.0 / r.dw0[ji];
        double nrm = std::max(std::abs(c[j0]), std::abs(c[ji]));
        for (auto& v : c) v /= nrm;
        r.basis.push_back(std::move(c));
    }
    return r;
}

bool zero_energy_never_eigenvalue(const StarGraph& g, const ClassifyOptions& opt) {
    auto cls = classify_zero_energy(g, opt);
    if (cls.m == 0) return true; // no admissible zero-energy solution at all
    // theta_j(x, 0) -> 1, so each basis solution keeps amplitude |c_j| at
    // infinity; a square-integrable combination would need all c_j = 0.
    for (const auto& c : cls.basis) {
        double amp = 0.0;
        for (double v : c) amp = std::max(amp, std::abs(v));
        if (amp <= 1e-12) return false;
    }
    return true;
}

} // namespace starshift::spectrum
