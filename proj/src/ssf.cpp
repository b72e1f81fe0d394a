#include "starshift/ssf.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "starshift/graph_ops.hpp"

namespace starshift::ssf {

namespace {

using std::complex;
constexpr double pi = std::numbers::pi;

double energy_scale(const StarGraph& g) {
    double s = 1.0;
    for (const auto& V : g.edges) s = std::max(s, V.sup_abs());
    return s;
}

// P and D from the cheap (underived) edge data; the phase machinery never
// needs zeta-derivatives.
complex<double> pole_free_light(const StarGraph& g, complex<double> zeta,
                                const JostOptions& jopt) {
    std::vector<jost::JostValue> e;
    e.reserve(g.edges.size());
    for (const auto& V : g.edges) e.push_back(jost::jost_w(V, jost::SpectralParam{zeta}, jopt));
    complex<double> acc = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) {
        complex<double> t = e[j].dw;
        for (std::size_t k = 0; k < e.size(); ++k)
            if (k != j) t *= e[k].w;
        acc += t;
    }
    return acc;
}

complex<double> det_light(const StarGraph& g, complex<double> zeta, const JostOptions& jopt) {
    return pole_free_light(g, zeta, jopt) /
           (complex<double>(0.0, 1.0) * static_cast<double>(g.n()) * zeta);
}

// ---- adaptive Gauss-Kronrod 7/15 ---------------------------------------

constexpr double kGkNodes[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0,
};
constexpr double kGkWeights[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278,
};
constexpr double kGaussWeights[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694,
};

struct Segment {
    double a, b;
    complex<double> val;
    double err;
};

template <typename F>
Segment gk15(const F& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    complex<double> fc = f(c);
    complex<double> k15 = kGkWeights[7] * fc;
    complex<double> g7 = kGaussWeights[3] * fc;
    for (int i = 0; i < 7; ++i) {
        complex<double> f1 = f(c - h * kGkNodes[i]);
        complex<double> f2 = f(c + h * kGkNodes[i]);
        k15 += kGkWeights[i] * (f1 + f2);
        if (i % 2 == 1) g7 += kGaussWeights[i / 2] * (f1 + f2);
    }
    return {a, b, k15 * h, std::abs(k15 - g7) * std::abs(h)};
}

template <typename F>
complex<double> adaptive_gk(const F& f, const std::vector<double>& knots, double rtol,
                            double atol, int max_segments) {
    std::vector<Segment> segs;
    segs.reserve(knots.size() + 64);
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
        segs.push_back(gk15(f, knots[i], knots[i + 1]));
    for (;;) {
        complex<double> total = 0.0;
        double err = 0.0;
        for (const auto& s : segs) {
            total += s.val;
            err += s.err;
        }
        if (err <= std::max(atol, rtol * std::abs(total))) return total;
        if (static_cast<int>(segs.size()) >= max_segments)
            throw NotConverged("quadrature error " + std::to_string(err) +
                               " did not reach tolerance within the segment budget");
        auto worst = std::max_element(
            segs.begin(), segs.end(),
            [](const Segment& x, const Segment& y) { return x.err < y.err; });
        double a = worst->a, b = worst->b, mid = 0.5 * (a + b);
        *worst = gk15(f, a, mid);
        segs.push_back(gk15(f, mid, b));
    }
}

// Full Krein integral int xi(lambda) (lambda - z)^{-2} dlambda over the line.
complex<double> xi_integral(const StarGraph& g, const PhaseCurve& c,
                            const std::vector<double>& eigs_ascending, complex<double> z,
                            const SsfOptions& opt) {
    auto F = [&](double l) { return -1.0 / (complex<double>(l) - z); }; // antiderivative

    complex<double> total = 0.0;

    // negative axis: xi = -(j+1) between consecutive eigenvalues, exactly
    for (std::size_t j = 0; j < eigs_ascending.size(); ++j) {
        double lo = eigs_ascending[j];
        double hi = (j + 1 < eigs_ascending.size()) ? eigs_ascending[j + 1] : 0.0;
        total += -static_cast<double>(j + 1) * (F(hi) - F(lo));
    }

    double lmin = opt.lambda_min_rel * c.scale;
    double lmax = opt.lambda_max_rel * c.scale;

    // head [0, lambda_min]: xi is continuous at 0+, treat it as constant
    total += xi_at(g, c, lmin, opt) * (F(lmin) - F(0.0));

    // bulk, seeded so the worklist does not have to discover ten decades
    auto integrand = [&](double l) {
        complex<double> den = complex<double>(l) - z;
        return xi_at(g, c, l, opt) / (den * den);
    };
    const int nseed = 40;
    std::vector<double> knots(nseed + 1);
    for (int i = 0; i <= nseed; ++i)
        knots[i] = lmin * std::pow(lmax / lmin, static_cast<double>(i) / nseed);
    total += adaptive_gk(integrand, knots, opt.quad_rtol, opt.quad_atol,
                         opt.max_quad_segments);

    // tail: xi ~ xi(L) sqrt(L / lambda) beyond the anchor; verify the decay
    // rate before trusting the model
    double xiL = xi_at(g, c, lmax, opt);
    double xiL16 = xi_at(g, c, lmax / 16.0, opt);
    if (std::abs(xiL) > 1e-6 && std::abs(xiL16) > 1e-6 && xiL * xiL16 > 0.0) {
        double p = std::log(std::abs(xiL16) / std::abs(xiL)) / std::log(16.0);
        if (p < 0.25)
            throw TailTooFat("spectral shift decays with exponent " + std::to_string(p) +
                             " at the anchor; raise lambda_max_rel");
    }
    // int_L^inf l^{-1/2} (l - z)^{-2} dl = 2 int_{sqrt(L)}^inf (t^2 + a^2)^{-2} dt
    // with a = sqrt(-z), done in closed form
    complex<double> a2 = -z;
    complex<double> a = std::sqrt(a2); // Re a > 0 for z off the positive axis
    double T = std::sqrt(lmax);
    complex<double> tail_int =
        (0.5 * pi - std::atan(T / a)) / (2.0 * a2 * a) - T / (2.0 * a2 * (T * T + a2));
    total += xiL * std::sqrt(lmax) * 2.0 * tail_int;

    return total;
}

void require_off_spectrum(complex<double> z) {
    if (z.imag() == 0.0 && z.real() >= 0.0)
        throw ValidationError("z must stay off the continuous spectrum [0, inf)");
}

} // namespace

double PhaseCurve::eta_ref(double kq) const {
    if (k.empty()) return 0.0;
    if (kq <= k.front()) return eta.front();
    if (kq >= k.back()) return eta.back() * (k.back() / kq); // 1/k asymptotics
    auto it = std::lower_bound(k.begin(), k.end(), kq);
    std::size_t i = static_cast<std::size_t>(it - k.begin());
    double t = std::log(kq / k[i - 1]) / std::log(k[i] / k[i - 1]);
    return eta[i - 1] + t * (eta[i] - eta[i - 1]);
}

PhaseCurve phase_curve(const StarGraph& g, const SsfOptions& opt) {
    PhaseCurve c;
    c.scale = energy_scale(g);
    double k_lo = std::sqrt(opt.lambda_min_rel * c.scale);
    double k_hi = std::sqrt(opt.lambda_max_rel * c.scale);

    // the branch is pinned at the top, so make sure the top is asymptotic
    complex<double> d_top = det_light(g, k_hi, opt.jost);
    if (std::abs(d_top - 1.0) >= opt.anchor_margin)
        throw AnchorTooSmall("|D - 1| = " + std::to_string(std::abs(d_top - 1.0)) +
                             " at the anchor k = " + std::to_string(k_hi) +
                             "; raise lambda_max_rel");

    int n = std::max(opt.curve_points, 8);
    std::vector<double> ks(n);
    double r = std::log(k_hi / k_lo);
    for (int i = 0; i < n; ++i)
        ks[i] = k_lo * std::exp(r * static_cast<double>(i) / (n - 1));
    std::vector<complex<double>> ds(n);
    ds[n - 1] = d_top;
    for (int i = 0; i < n - 1; ++i) ds[i] = det_light(g, ks[i], opt.jost);

    std::vector<std::pair<double, double>> pts;
    pts.reserve(n + 32);
    pts.emplace_back(ks[n - 1], std::arg(d_top));

    // walk down; any hop above pi/2 is resolved by geometric bisection so the
    // unwrap can never skip a winding
    std::function<double(double, complex<double>, double, double, complex<double>, int)> step =
        [&](double kh, complex<double> dh, double eh, double kl, complex<double> dl,
            int depth) -> double {
        double hop = std::arg(dl / dh);
        if (std::abs(hop) <= 0.5 * pi) return eh + hop;
        if (depth >= opt.max_refine_depth)
            throw RefinementLimit("phase jump near k = " + std::to_string(kl) +
                                  " survived " + std::to_string(depth) + " bisections");
        double km = std::sqrt(kh * kl);
        complex<double> dm = det_light(g, km, opt.jost);
        double em = step(kh, dh, eh, km, dm, depth + 1);
        pts.emplace_back(km, em);
        return step(km, dm, em, kl, dl, depth + 1);
    };

    for (int i = n - 2; i >= 0; --i) {
        double e = step(ks[i + 1], ds[i + 1], pts.back().second, ks[i], ds[i], 0);
        pts.emplace_back(ks[i], e);
    }

    std::sort(pts.begin(), pts.end());
    c.k.reserve(pts.size());
    c.eta.reserve(pts.size());
    for (const auto& [kk, ee] : pts) {
        c.k.push_back(kk);
        c.eta.push_back(ee);
    }
    return c;
}

double xi_at(const StarGraph& g, const PhaseCurve& c, double lambda, const SsfOptions& opt) {
    if (!(lambda > 0.0)) throw ValidationError("xi_at needs lambda > 0");
    double kq = std::sqrt(lambda);
    double a = std::arg(det_light(g, kq, opt.jost));
    double ref = c.eta_ref(kq);
    double eta = a + 2.0 * pi * std::round((ref - a) / (2.0 * pi));
    return eta / pi;
}

double xi_zero_plus(const PhaseCurve& c, int fit_points) {
    std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(fit_points), c.k.size());
    if (m < 2) throw ValidationError("phase curve too short for the threshold fit");
    double sk = 0, se = 0, skk = 0, ske = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sk += c.k[i];
        se += c.eta[i];
        skk += c.k[i] * c.k[i];
        ske += c.k[i] * c.eta[i];
    }
    double det = static_cast<double>(m) * skk - sk * sk;
    return (skk * se - sk * ske) / det / pi;
}

double low_energy_exponent(const StarGraph& g, const SsfOptions& opt) {
    double s = std::sqrt(energy_scale(g));
    const int m = 12;
    double klo = 1e-3 * s, khi = 1e-2 * s;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    bool first_positive = false;
    for (int i = 0; i < m; ++i) {
        double kap = klo * std::pow(khi / klo, static_cast<double>(i) / (m - 1));
        // D is real on zeta = i kappa
        double d = std::real(det_light(g, complex<double>(0.0, kap), opt.jost));
        if (i == 0) first_positive = d > 0.0;
        if (d == 0.0 || (d > 0.0) != first_positive)
            throw WindowContainsZero("determinant changes sign at kappa = " +
                                     std::to_string(kap) +
                                     "; an eigenvalue sits inside the fit window");
        double x = std::log(kap), y = std::log(std::abs(d));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

LevinsonResult levinson_check(const StarGraph& g, const SsfOptions& opt) {
    LevinsonResult r;
    r.xi0 = xi_zero_plus(phase_curve(g, opt), opt.fit_points);
    r.bound_states = spectrum::count_negative_eigenvalues(g, opt.spectrum).count();
    spectrum::ClassifyOptions copt;
    copt.jost = opt.jost;
    r.multiplicity = spectrum::classify_zero_energy(g, copt).m;
    r.residual = r.xi0 + r.bound_states + 0.5 * (r.multiplicity - 1);
    return r;
}

DispersionResult dispersion_check(const StarGraph& g, complex<double> z,
                                  const SsfOptions& opt) {
    require_off_spectrum(z);
    DispersionResult r;
    r.lhs = graph_ops::trace_resolvent_diff_formula(g, jost::SpectralParam::from_z(z),
                                                    opt.jost);
    auto curve = phase_curve(g, opt);
    auto eigs = spectrum::count_negative_eigenvalues(g, opt.spectrum).eigenvalues();
    r.rhs = xi_integral(g, curve, eigs, z, opt);
    r.residual = std::abs(r.lhs - r.rhs) / std::max(1.0, std::abs(r.lhs));
    return r;
}

DispersionResult trace_test_function_check(const StarGraph& g, complex<double> z1,
                                           complex<double> z2, const SsfOptions& opt) {
    require_off_spectrum(z1);
    require_off_spectrum(z2);
    auto curve = phase_curve(g, opt);
    auto eigs = spectrum::count_negative_eigenvalues(g, opt.spectrum).eigenvalues();
    DispersionResult r;
    // tr(f(H) - f(H0)) for f = (l - z1)^{-1} - (l - z2)^{-1} in terms of the
    // two resolvent traces, matched against int xi f'
    auto T = [&](complex<double> z) {
        return graph_ops::trace_resolvent_diff_formula(g, jost::SpectralParam::from_z(z),
                                                       opt.jost);
    };
    r.lhs = -T(z1) + T(z2);
    r.rhs = -xi_integral(g, curve, eigs, z1, opt) + xi_integral(g, curve, eigs, z2, opt);
    r.residual = std::abs(r.lhs - r.rhs) / std::max(1.0, std::abs(r.lhs));
    return r;
}

} // namespace starshift::ssf
