#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "starshift/graph_ops.hpp"
#include "support/closed_form.hpp"

using namespace starshift;
using namespace starshift::graph_ops;
using potentials::EdgePotential;
using potentials::StarGraph;
using cplx = std::complex<double>;
constexpr cplx I{0.0, 1.0};

static StarGraph free_graph(int n) {
    std::vector<EdgePotential> e(n, EdgePotential::zero());
    return StarGraph{e};
}

TEST_CASE("free star graphs: D = 1 and trace difference vanishes") {
    for (int n : {2, 3, 5}) {
        auto g = free_graph(n);
        for (cplx z : {cplx(-4.0, 0.0), cplx(1.0, 2.0), cplx(-0.3, 0.01)}) {
            auto d = graph_jost(g, SpectralParam::from_z(z));
            CHECK(std::abs(perturbation_determinant(d) - 1.0) <= 1e-15);
            CHECK(std::abs(trace_resolvent_diff_formula(d)) <= 1e-15);
        }
    }
}

TEST_CASE("n = 2 with one well reproduces the line transmission amplitude") {
    double d = -2.0, a = 1.3;
    StarGraph g{{EdgePotential::square_well(d, a), EdgePotential::zero()}};
    for (double k : {0.5, 1.0, 2.7, 8.0}) {
        auto D = perturbation_determinant(g, SpectralParam::from_k(k));
        auto ref = closed_form::line_inv_transmission(d, a, k);
        CHECK(std::abs(D - ref) <= 1e-8 * std::abs(ref));
    }
}

static StarGraph mixed_graph() {
    return StarGraph{{EdgePotential::square_well(-4.0, 1.5),
                      EdgePotential::exponential(-1.0, 2.0), EdgePotential::zero()}};
}

TEST_CASE("pole-free sum equals K times the product of Jost functions") {
    auto g = mixed_graph();
    for (cplx zeta : {cplx(0.8, 0.5), cplx(0.0, 1.3), cplx(2.0, 0.0)}) {
        auto d = graph_jost(g, SpectralParam::from_zeta(zeta));
        cplx prod = 1.0;
        for (const auto& e : d.edges) prod *= e.w;
        cplx lhs = pole_free_sum(d);
        cplx rhs = kirchhoff_sum(d) * prod;
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (std::abs(lhs) + 1.0));
    }
}

TEST_CASE("Schwarz reflection: D(conj z) = conj D(z)") {
    auto g = mixed_graph();
    for (cplx z : {cplx(2.0, 3.0), cplx(-1.0, 0.4), cplx(0.5, 0.05)}) {
        auto Dup = perturbation_determinant(g, SpectralParam::from_z(z));
        auto Ddn = perturbation_determinant(g, SpectralParam::from_z(std::conj(z)));
        CHECK(std::abs(Ddn - std::conj(Dup)) <= 1e-9 * std::abs(Dup));
    }
}

TEST_CASE("trace formula equals d/dz log D by central differences") {
    auto g = mixed_graph();
    for (cplx z : {cplx(-4.0, 0.5), cplx(-2.0, 0.0), cplx(1.0, 1.5)}) {
        double dz = 1e-5 * std::abs(z);
        auto Dp = perturbation_determinant(g, SpectralParam::from_z(z + dz));
        auto Dm = perturbation_determinant(g, SpectralParam::from_z(z - dz));
        cplx fd = std::log(Dp / Dm) / (2.0 * dz);
        cplx tf = trace_resolvent_diff_formula(g, SpectralParam::from_z(z));
        CHECK(std::abs(tf - fd) <= 1e-6 * (1.0 + std::abs(tf)));
    }
}

TEST_CASE("free n = 2 kernel matches the known line resolvent") {
    auto g = free_graph(2);
    auto p = SpectralParam::from_z(cplx(-1.21, 0.0)); // zeta = 1.1 i
    std::vector<double> grid{0.0, 0.3, 0.9, 1.7};
    KreinKernel R(g, p, {grid, grid});
    cplx zeta = p.zeta;
    for (std::size_t ix = 0; ix < grid.size(); ++ix)
        for (std::size_t iy = 0; iy < grid.size(); ++iy) {
            double same = std::abs(grid[ix] - grid[iy]);
            double cross = grid[ix] + grid[iy];
            cplx ref_same = I * std::exp(I * zeta * same) / (2.0 * zeta);
            cplx ref_cross = I * std::exp(I * zeta * cross) / (2.0 * zeta);
            // regular solutions are themselves integrated at rtol 1e-10
            CHECK(std::abs(R.value(0, ix, 0, iy) - ref_same) <= 1e-9);
            CHECK(std::abs(R.value(0, ix, 1, iy) - ref_cross) <= 1e-9);
            CHECK(std::abs(R.value(1, ix, 0, iy) - ref_cross) <= 1e-9);
        }
}

TEST_CASE("kernel satisfies the resolvent ODE, jump, and vertex conditions") {
    auto g = mixed_graph();
    cplx z(-2.0, 0.3);
    auto p = SpectralParam::from_z(z);

    double h = 0.002;
    std::vector<double> fine;
    for (int i = 0; i <= 1000; ++i) fine.push_back(i * h);
    std::vector<double> stub{0.0, h, 2 * h, 3 * h};
    KreinKernel R(g, p, {fine, stub, stub});

    const std::size_t iy = 350; // y0 = 0.7, inside the well on edge 0
    double y0 = fine[iy];
    const auto& V = g.edges[0];

    SUBCASE("second difference reproduces (V - z) R away from the source") {
        for (std::size_t ix = 5; ix + 5 < fine.size(); ix += 7) {
            if (std::abs(fine[ix] - y0) < 5 * h) continue;
            if (std::abs(fine[ix] - 1.5) < 2 * h) continue; // well edge kink
            cplx d2 = (R.value(0, ix + 1, 0, iy) - 2.0 * R.value(0, ix, 0, iy) +
                       R.value(0, ix - 1, 0, iy)) /
                      (h * h);
            cplx rhs = (V(fine[ix]) - z) * R.value(0, ix, 0, iy);
            CHECK(std::abs(d2 - rhs) <= 1e-4 * (1.0 + std::abs(rhs)));
        }
    }

    SUBCASE("derivative jump at the source point is -1") {
        auto v = [&](std::size_t ix) { return R.value(0, ix, 0, iy); };
        cplx right = (-3.0 * v(iy) + 4.0 * v(iy + 1) - v(iy + 2)) / (2.0 * h);
        cplx left = (3.0 * v(iy) - 4.0 * v(iy - 1) + v(iy - 2)) / (2.0 * h);
        CHECK(std::abs(right - left - cplx(-1.0, 0.0)) <= 1e-3);
    }

    SUBCASE("continuity and current conservation at the vertex") {
        cplx r0 = R.value(0, 0, 0, iy);
        cplx r1 = R.value(1, 0, 0, iy);
        cplx r2 = R.value(2, 0, 0, iy);
        CHECK(std::abs(r0 - r1) <= 1e-9 * (1.0 + std::abs(r0)));
        CHECK(std::abs(r0 - r2) <= 1e-9 * (1.0 + std::abs(r0)));
        auto dvert = [&](int j) {
            auto v = [&](std::size_t ix) { return R.value(j, ix, 0, iy); };
            return (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h);
        };
        cplx total = dvert(0) + dvert(1) + dvert(2);
        CHECK(std::abs(total) <= 1e-3 * (1.0 + std::abs(dvert(0))));
    }
}

TEST_CASE("vanishing edge Jost function raises JostZero") {
    double tuned = -(M_PI / 2) * (M_PI / 2);
    StarGraph g{{EdgePotential::square_well(tuned, 1.0), EdgePotential::zero()}};
    auto d = graph_jost(g, SpectralParam::from_zeta(0.0));
    CHECK_THROWS_AS(kirchhoff_sum(d), JostZero);
}

TEST_CASE("evaluating the trace formula on an eigenvalue raises EigenvalueHit") {
    StarGraph g{{EdgePotential::square_well(-4.0, 2.0), EdgePotential::zero()}};
    auto f = [&](double kappa) {
        auto d = graph_jost(g, SpectralParam::from_z(cplx(-kappa * kappa, 0.0)));
        return std::real(pole_free_sum(d));
    };
    // locate the first sign change on a scan grid (the well holds two states)
    double lo = 0.0, hi = 0.0;
    double prev_k = 0.05, prev_f = f(prev_k);
    for (int i = 1; i <= 400 && hi == 0.0; ++i) {
        double k = 0.05 + (1.99 - 0.05) * i / 400.0;
        double fk = f(k);
        if (prev_f * fk < 0.0) { lo = prev_k; hi = k; }
        prev_k = k;
        prev_f = fk;
    }
    REQUIRE(hi > 0.0);
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (f(mid) * flo > 0.0 ? lo : hi) = mid;
        flo = f(lo);
    }
    double kappa = 0.5 * (lo + hi);
    CHECK_THROWS_AS(
        trace_resolvent_diff_formula(g, SpectralParam::from_z(cplx(-kappa * kappa, 0.0))),
        EigenvalueHit);
}

TEST_CASE("zeta = 0 is rejected where formulas divide by it") {
    auto g = free_graph(2);
    auto d = graph_jost(g, SpectralParam::from_zeta(0.0));
    CHECK_THROWS_AS(perturbation_determinant(d), ZeroSpectralParam);
    CHECK_THROWS_AS(trace_resolvent_diff_formula(d), ZeroSpectralParam);
}
