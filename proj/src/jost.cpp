#include "starshift/jost.hpp"

#include <algorithm>
#include <cmath>

#include "starshift/ode.hpp"

namespace starshift::jost {

namespace {

using std::complex;
constexpr complex<double> I{0.0, 1.0};

struct Rhs2 {
    const EdgePotential* V;
    complex<double> z;
    void operator()(double x, const ode::State<2>& y, ode::State<2>& dy) const {
        dy[0] = y[1];
        dy[1] = ((*V)(x) - z) * y[0];
    }
};

// Augmented with the zeta-derivative pair: v = d theta / d zeta solves
// v'' = (V - z) v - 2 zeta theta.
struct Rhs4 {
    const EdgePotential* V;
    complex<double> z, zeta;
    void operator()(double x, const ode::State<4>& y, ode::State<4>& dy) const {
        complex<double> q = (*V)(x) - z;
        dy[0] = y[1];
        dy[1] = q * y[0];
        dy[2] = y[3];
        dy[3] = q * y[2] - 2.0 * zeta * y[0];
    }
};

double truncation(const EdgePotential& V, const JostOptions& opt, complex<double> zeta) {
    double x_max = V.truncation_point(opt.trunc_eps);
    if (std::imag(zeta) * x_max > 600.0)
        throw TrustRegionExceeded(
            "Im(zeta) * support is too large for direct Jost integration");
    return x_max;
}

std::vector<double> interior_breaks(const EdgePotential& V, double lo, double hi) {
    std::vector<double> nodes;
    for (double b : V.breakpoints())
        if (b > lo && b < hi) nodes.push_back(b);
    return nodes;
}

double est_error_of(const EdgePotential& V, const JostOptions& opt,
                    complex<double> zeta, double x_max) {
    return opt.rtol * (1.0 + std::abs(zeta)) * x_max + V.tail_bound(x_max);
}

void check_grid(std::span<const double> grid) {
    if (grid.empty()) throw ValidationError("solution grid must be nonempty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0)) throw ValidationError("solution grid must be >= 0");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw ValidationError("solution grid must be strictly increasing");
    }
}

} // namespace

SpectralParam SpectralParam::from_zeta(complex<double> zeta) {
    if (std::imag(zeta) < 0.0)
        throw ValidationError("spectral parameter needs Im zeta >= 0");
    return {zeta};
}

SpectralParam SpectralParam::from_z(complex<double> z) {
    if (std::imag(z) == 0.0) {
        double lam = std::real(z);
        if (lam >= 0.0) {
            double k = std::sqrt(lam);
            return {complex<double>(std::signbit(std::imag(z)) ? -k : k, 0.0)};
        }
        return {complex<double>(0.0, std::sqrt(-lam))};
    }
    complex<double> s = std::sqrt(z);
    if (std::imag(s) < 0.0) s = -s;
    return {s};
}

JostData jost_boundary(const EdgePotential& V, SpectralParam p, const JostOptions& opt) {
    complex<double> zeta = p.zeta;
    double x_max = truncation(V, opt, zeta);
    complex<double> E = std::exp(I * zeta * x_max);
    ode::State<4> y{E, I * zeta * E, I * x_max * E, (I - x_max * zeta) * E};
    if (x_max > 0.0) {
        ode::Options oo{opt.rtol, opt.atol, 20'000'000};
        auto nodes = interior_breaks(V, 0.0, x_max);
        ode::integrate(
            Rhs4{&V, p.z(), zeta}, x_max, 0.0, y, oo, nodes,
            [](double, const ode::State<4>&) {});
    }
    return {y[0], y[1], y[2], y[3], est_error_of(V, opt, zeta, x_max)};
}

JostValue jost_w(const EdgePotential& V, SpectralParam p, const JostOptions& opt) {
    complex<double> zeta = p.zeta;
    double x_max = truncation(V, opt, zeta);
    complex<double> E = std::exp(I * zeta * x_max);
    ode::State<2> y{E, I * zeta * E};
    if (x_max > 0.0) {
        ode::Options oo{opt.rtol, opt.atol, 20'000'000};
        auto nodes = interior_breaks(V, 0.0, x_max);
        ode::integrate(
            Rhs2{&V, p.z()}, x_max, 0.0, y, oo, nodes,
            [](double, const ode::State<2>&) {});
    }
    return {y[0], y[1], est_error_of(V, opt, zeta, x_max)};
}

SolutionOnGrid jost_solution(const EdgePotential& V, SpectralParam p,
                             std::span<const double> grid, const JostOptions& opt) {
    check_grid(grid);
    complex<double> zeta = p.zeta;
    double x_max = truncation(V, opt, zeta);

    SolutionOnGrid out;
    out.x.assign(grid.begin(), grid.end());
    out.u.resize(grid.size());
    out.du.resize(grid.size());
    out.est_error = est_error_of(V, opt, zeta, x_max);

    // Beyond the truncation point the solution is the free exponential.
    std::size_t n_low = 0;
    while (n_low < grid.size() && grid[n_low] < x_max) ++n_low;
    for (std::size_t i = n_low; i < grid.size(); ++i) {
        if (std::imag(zeta) * grid[i] > 600.0)
            throw TrustRegionExceeded("Jost solution underflows at requested x");
        complex<double> E = std::exp(I * zeta * grid[i]);
        out.u[i] = E;
        out.du[i] = I * zeta * E;
    }
    if (n_low == 0) return out;

    complex<double> E = std::exp(I * zeta * x_max);
    ode::State<2> y{E, I * zeta * E};
    double x_end = grid[0];
    auto nodes = interior_breaks(V, x_end, x_max);
    for (std::size_t i = 0; i < n_low; ++i)
        if (grid[i] > x_end && grid[i] < x_max) nodes.push_back(grid[i]);

    std::size_t pending = n_low; // records walk downward through grid[0..n_low)
    ode::Options oo{opt.rtol, opt.atol, 20'000'000};
    ode::integrate(Rhs2{&V, p.z()}, x_max, x_end, y, oo, nodes,
                   [&](double x, const ode::State<2>& s) {
                       while (pending > 0 &&
                              std::abs(grid[pending - 1] - x) <=
                                  1e-12 * (1.0 + std::abs(x))) {
                           out.u[pending - 1] = s[0];
                           out.du[pending - 1] = s[1];
                           --pending;
                       }
                   });
    if (pending != 0) throw SpectralError("internal: grid point missed in downward sweep");
    return out;
}

SolutionOnGrid regular_solution(const EdgePotential& V, SpectralParam p,
                                std::span<const double> grid, const JostOptions& opt) {
    check_grid(grid);
    SolutionOnGrid out;
    out.x.assign(grid.begin(), grid.end());
    out.u.resize(grid.size());
    out.du.resize(grid.size());
    out.est_error = opt.rtol * (1.0 + std::abs(p.zeta)) * grid.back();

    std::size_t start = 0;
    if (grid[0] == 0.0) {
        out.u[0] = 0.0;
        out.du[0] = 1.0;
        start = 1;
        if (grid.size() == 1) return out;
    }

    ode::State<2> y{0.0, 1.0};
    auto nodes = interior_breaks(V, 0.0, grid.back());
    for (std::size_t i = start; i + 1 < grid.size(); ++i) nodes.push_back(grid[i]);

    std::size_t pending = start;
    ode::Options oo{opt.rtol, opt.atol, 20'000'000};
    ode::integrate(Rhs2{&V, p.z()}, 0.0, grid.back(), y, oo, nodes,
                   [&](double x, const ode::State<2>& s) {
                       while (pending < grid.size() &&
                              std::abs(grid[pending] - x) <=
                                  1e-12 * (1.0 + std::abs(x))) {
                           out.u[pending] = s[0];
                           out.du[pending] = s[1];
                           ++pending;
                       }
                   });
    if (pending != grid.size())
        throw SpectralError("internal: grid point missed in outward sweep");
    return out;
}

std::vector<complex<double>> wronskian(const SolutionOnGrid& a, const SolutionOnGrid& b) {
    if (a.x.size() != b.x.size())
        throw ValidationError("wronskian needs solutions on the same grid");
    std::vector<complex<double>> w(a.x.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = a.u[i] * b.du[i] - a.du[i] * b.u[i];
    return w;
}

} // namespace starshift::jost
