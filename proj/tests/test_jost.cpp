#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "starshift/jost.hpp"
#include "support/closed_form.hpp"

using namespace starshift;
using potentials::EdgePotential;
using jost::JostData;
using jost::SpectralParam;
using cplx = std::complex<double>;

static void check_against_well(double d, double a, cplx zeta, double tol = 1e-8) {
    auto V = EdgePotential::square_well(d, a);
    auto got = jost::jost_boundary(V, SpectralParam::from_zeta(zeta));
    auto ref = closed_form::well_jost(d, a, zeta);
    CAPTURE(d);
    CAPTURE(a);
    CAPTURE(zeta);
    CHECK(std::abs(got.w - ref.w) <= tol);
    CHECK(std::abs(got.dw - ref.dw) <= tol * (1.0 + std::abs(zeta)));
    CHECK(std::abs(got.wdot - ref.wdot) <= tol * (1.0 + a));
    CHECK(std::abs(got.dwdot - ref.dwdot) <= tol * (1.0 + a * std::abs(zeta)));
}

TEST_CASE("jost boundary data matches closed form for square wells") {
    for (double d : {-1.0, -6.5, 2.0})
        for (double a : {0.7, 1.0, 1.9}) {
            check_against_well(d, a, cplx(0.9, 0.0));
            check_against_well(d, a, cplx(-2.3, 0.0));
            check_against_well(d, a, cplx(0.0, 1.1));
            check_against_well(d, a, cplx(1.2, 0.6));
            check_against_well(d, a, cplx(0.0, 0.0));
            check_against_well(d, a, cplx(7.0, 0.0), 1e-7);
        }
}

TEST_CASE("free edge is exact") {
    auto V = EdgePotential::zero();
    auto p = SpectralParam::from_k(1.7);
    auto data = jost::jost_boundary(V, p);
    CHECK(data.w == cplx(1.0, 0.0));
    CHECK(data.dw == cplx(0.0, 1.7));
    CHECK(data.wdot == cplx(0.0, 0.0));
    CHECK(data.dwdot == cplx(0.0, 1.0));
    CHECK(data.est_error == 0.0);
}

TEST_CASE("zeta-derivative identities at zeta = 0") {
    const cplx mi{0.0, -1.0};
    SUBCASE("generic well: W[theta, theta-dot] = -i") {
        auto V = EdgePotential::square_well(-1.0, 1.0);
        auto d0 = jost::jost_boundary(V, SpectralParam::from_zeta(0.0));
        // When theta(0,0) != 0: wdot * dw - dwdot * w = -i
        CHECK(std::abs(d0.wdot * d0.dw - d0.dwdot * d0.w - mi) <= 1e-8);
    }
    SUBCASE("tuned well with vanishing Jost function: wdot * dw = -i") {
        double d = -(M_PI / 2) * (M_PI / 2);
        auto V = EdgePotential::square_well(d, 1.0);
        auto d0 = jost::jost_boundary(V, SpectralParam::from_zeta(0.0));
        CHECK(std::abs(d0.w) <= 1e-9);
        CHECK(std::abs(d0.wdot * d0.dw - mi) <= 1e-8);
    }
}

TEST_CASE("conjugation symmetry across k -> -k") {
    auto V = EdgePotential::square_well(-3.0, 1.3);
    for (double k : {0.4, 1.9, 12.0}) {
        auto plus = jost::jost_boundary(V, SpectralParam::from_k(k));
        auto minus = jost::jost_boundary(V, SpectralParam::from_k(-k));
        // undotted entries conjugate; zeta-derivatives pick up an extra sign
        CHECK(std::abs(minus.w - std::conj(plus.w)) <= 1e-12);
        CHECK(std::abs(minus.dw - std::conj(plus.dw)) <= 1e-12 * (1 + k));
        CHECK(std::abs(minus.wdot + std::conj(plus.wdot)) <= 1e-12);
        CHECK(std::abs(minus.dwdot + std::conj(plus.dwdot)) <= 1e-12 * (1 + k));
    }
}

TEST_CASE("jost_solution and regular_solution match closed form inside the well") {
    double d = -4.0, a = 1.5;
    auto V = EdgePotential::square_well(d, a);
    cplx zeta(1.1, 0.35);
    auto p = SpectralParam::from_zeta(zeta);
    std::vector<double> grid;
    for (int i = 0; i <= 30; ++i) grid.push_back(a * i / 30.0);
    auto th = jost::jost_solution(V, p, grid);
    auto ph = jost::regular_solution(V, p, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        cplx rt, rdt, rp, rdp;
        closed_form::well_theta_at(d, a, zeta, grid[i], rt, rdt);
        closed_form::well_phi_at(d, a, zeta, grid[i], rp, rdp);
        CHECK(std::abs(th.u[i] - rt) <= 1e-8);
        CHECK(std::abs(th.du[i] - rdt) <= 1e-8 * (1 + std::abs(zeta)));
        CHECK(std::abs(ph.u[i] - rp) <= 1e-8);
        CHECK(std::abs(ph.du[i] - rdp) <= 1e-8);
    }
    SUBCASE("points beyond the support get the free exponential") {
        std::vector<double> far{0.0, a, 2.0 * a, 4.0 * a};
        auto sol = jost::jost_solution(V, p, far);
        cplx E = std::exp(cplx(0, 1) * zeta * far[3]);
        CHECK(std::abs(sol.u[3] - E) <= 1e-10);
        CHECK(std::abs(sol.du[3] - cplx(0, 1) * zeta * E) <= 1e-10);
    }
}

TEST_CASE("wronskian of jost and regular solutions is constant and equals w") {
    auto V = EdgePotential::square_well(-2.0, 1.0);
    auto p = SpectralParam::from_k(1.3);
    std::vector<double> grid;
    for (int i = 0; i <= 50; ++i) grid.push_back(5.0 * i / 50.0);
    auto th = jost::jost_solution(V, p, grid);
    auto ph = jost::regular_solution(V, p, grid);
    auto W = jost::wronskian(th, ph);
    auto w = jost::jost_boundary(V, p).w;
    for (auto Wi : W) CHECK(std::abs(Wi - w) <= 1e-9);
}

TEST_CASE("spectral parameter construction") {
    CHECK_THROWS_AS(SpectralParam::from_zeta(cplx(1.0, -0.5)), ValidationError);
    auto a = SpectralParam::from_z(cplx(-4.0, 0.0));
    CHECK(a.zeta == cplx(0.0, 2.0));
    auto b = SpectralParam::from_z(cplx(9.0, 0.0));
    CHECK(b.zeta == cplx(3.0, 0.0));
    auto c = SpectralParam::from_z(cplx(2.0, 3.0));
    CHECK(std::imag(c.zeta) > 0.0);
    CHECK(std::abs(c.z() - cplx(2.0, 3.0)) <= 1e-14);
    auto d = SpectralParam::from_z(cplx(4.0, -0.0));
    CHECK(d.zeta == cplx(-2.0, 0.0));
}

TEST_CASE("est_error reflects truncation and integration tolerances") {
    auto V = EdgePotential::exponential(-2.0, 1.0);
    jost::JostOptions opt;
    opt.trunc_eps = 1e-6;
    auto lo = jost::jost_boundary(V, SpectralParam::from_k(1.0), opt);
    CHECK(lo.est_error >= 1e-6);
    CHECK(lo.est_error <= 1e-4);
    opt.trunc_eps = 1e-12;
    auto hi = jost::jost_boundary(V, SpectralParam::from_k(1.0), opt);
    CHECK(hi.est_error < lo.est_error);
}

TEST_CASE("deep evanescent regime is rejected rather than silently wrong") {
    auto V = EdgePotential::exponential(-1.0, 0.02);
    CHECK_THROWS_AS(jost::jost_boundary(V, SpectralParam::from_zeta(cplx(0.0, 30.0))),
                    TrustRegionExceeded);
}
