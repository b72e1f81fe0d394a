#include "starshift/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "starshift/errors.hpp"

namespace starshift::oracle {

namespace {

using cd = std::complex<double>;

long long whole_steps(double L, double h) {
    if (!(L > 0.0) || !(h > 0.0)) throw ValidationError("discretize: need L > 0 and h > 0");
    long long steps = std::llround(L / h);
    if (steps < 2) throw ValidationError("discretize: fewer than two steps per edge");
    return steps;
}

// (1/h) x the integral of V against the P1 hat centered at x (clipped at 0).
// The pieces are split at potential breakpoints and at the hat kink, so the
// load stays second-order accurate across jumps of V.
double hat_load(const EdgePotential& V, const std::vector<double>& brk, double x, double h) {
    const double a = std::max(0.0, x - h), b = x + h;
    std::vector<double> cuts;
    cuts.push_back(a);
    if (x > a) cuts.push_back(x);
    for (auto it = std::upper_bound(brk.begin(), brk.end(), a); it != brk.end() && *it < b; ++it)
        cuts.push_back(*it);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    constexpr double gq = 0.5773502691896257; // 2-point Gauss on [-1, 1]
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double m = 0.5 * (cuts[i] + cuts[i + 1]), r = 0.5 * (cuts[i + 1] - cuts[i]);
        if (r <= 0.0) continue;
        for (double q : {m - r * gq, m + r * gq})
            acc += r * (1.0 - std::abs(q - x) / h) * V(q);
    }
    return acc / h;
}

std::vector<double> sorted_breakpoints(const EdgePotential& V) {
    auto brk = V.breakpoints();
    std::sort(brk.begin(), brk.end());
    return brk;
}

// (A - z) as a complex sparse matrix, assembled from the stored real A.
Eigen::SparseMatrix<cd> shifted(const Eigen::SparseMatrix<double>& A, cd z) {
    std::vector<Eigen::Triplet<cd>> trip;
    trip.reserve(static_cast<std::size_t>(A.nonZeros()));
    for (int col = 0; col < A.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it) {
            cd v = it.value();
            if (it.row() == it.col()) v -= z;
            trip.emplace_back(static_cast<int>(it.row()), col, v);
        }
    Eigen::SparseMatrix<cd> B(A.rows(), A.cols());
    B.setFromTriplets(trip.begin(), trip.end());
    return B;
}

std::vector<int> support_of_diff(const DiscretizedGraph& d, const DiscretizedGraph& d0,
                                 Eigen::VectorXd& shift) {
    if (d.size() != d0.size() || d.n != d0.n || d.per_edge != d0.per_edge ||
        d.has_vertex != d0.has_vertex)
        throw ValidationError("oracle: discretizations live on different grids");
    shift = Eigen::VectorXd(d.A.diagonal()) - Eigen::VectorXd(d0.A.diagonal());
    std::vector<int> supp;
    for (int i = 0; i < shift.size(); ++i)
        if (shift[i] != 0.0) supp.push_back(i);
    return supp;
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

} // namespace

DiscretizedGraph discretize(const StarGraph& g, double L, double h) {
    const int n = static_cast<int>(g.n());
    const long long steps = whole_steps(L, h);
    DiscretizedGraph d;
    d.n = n;
    d.has_vertex = true;
    d.per_edge = static_cast<int>(steps - 1);
    d.h = L / static_cast<double>(steps);
    d.L = L;
    const std::size_t unknowns = 1 + static_cast<std::size_t>(n) * d.per_edge;
    if (unknowns > 2'000'000)
        throw TrustRegionExceeded("discretize: more than 2e6 grid unknowns");

    const double ih2 = 1.0 / (d.h * d.h);
    std::vector<std::vector<double>> brks(n);
    double v0 = 0.0;
    for (int j = 0; j < n; ++j) {
        d.vmax = std::max(d.vmax, g.edges[j].sup_abs());
        brks[j] = sorted_breakpoints(g.edges[j]);
        v0 += hat_load(g.edges[j], brks[j], 0.0, d.h);
    }
    d.vertex_diag = 2.0 * ih2 + (2.0 / n) * v0;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * unknowns);
    trip.emplace_back(0, 0, d.vertex_diag);
    const double voff = -std::sqrt(2.0 / n) * ih2;
    d.edge_diag.assign(n, std::vector<double>(d.per_edge));
    for (int j = 0; j < n; ++j) {
        for (int i = 1; i <= d.per_edge; ++i) {
            const int row = d.index(j, i);
            const double a = 2.0 * ih2 + hat_load(g.edges[j], brks[j], i * d.h, d.h);
            d.edge_diag[j][i - 1] = a;
            trip.emplace_back(row, row, a);
            if (i == 1) {
                trip.emplace_back(row, 0, voff);
                trip.emplace_back(0, row, voff);
            } else {
                trip.emplace_back(row, row - 1, -ih2);
                trip.emplace_back(row - 1, row, -ih2);
            }
        }
    }
    d.A.resize(static_cast<int>(unknowns), static_cast<int>(unknowns));
    d.A.setFromTriplets(trip.begin(), trip.end());
    return d;
}

DiscretizedGraph discretize_half_line(const EdgePotential& V, double L, double h) {
    const long long steps = whole_steps(L, h);
    DiscretizedGraph d;
    d.n = 1;
    d.has_vertex = false;
    d.per_edge = static_cast<int>(steps - 1);
    d.h = L / static_cast<double>(steps);
    d.L = L;
    d.vmax = V.sup_abs();
    if (static_cast<std::size_t>(d.per_edge) > 2'000'000)
        throw TrustRegionExceeded("discretize_half_line: more than 2e6 grid unknowns");

    const double ih2 = 1.0 / (d.h * d.h);
    const auto brk = sorted_breakpoints(V);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * static_cast<std::size_t>(d.per_edge));
    d.edge_diag.assign(1, std::vector<double>(d.per_edge));
    for (int i = 1; i <= d.per_edge; ++i) {
        const double a = 2.0 * ih2 + hat_load(V, brk, i * d.h, d.h);
        d.edge_diag[0][i - 1] = a;
        trip.emplace_back(i - 1, i - 1, a);
        if (i > 1) {
            trip.emplace_back(i - 1, i - 2, -ih2);
            trip.emplace_back(i - 2, i - 1, -ih2);
        }
    }
    d.A.resize(d.per_edge, d.per_edge);
    d.A.setFromTriplets(trip.begin(), trip.end());
    return d;
}

int count_below(const DiscretizedGraph& d, double sigma) {
    const double ih4 = 1.0 / (d.h * d.h * d.h * d.h);
    int neg = 0;
    double vertex_acc = d.has_vertex ? d.vertex_diag - sigma : 0.0;
    for (int j = 0; j < d.n; ++j) {
        // eliminate from the outer Dirichlet end toward the vertex
        double piv = 0.0;
        for (int i = d.per_edge - 1; i >= 0; --i) {
            double t = d.edge_diag[j][i] - sigma;
            if (i < d.per_edge - 1) t -= ih4 / piv;
            if (t == 0.0) throw SingularShift("count_below: exact zero pivot");
            if (t < 0.0) ++neg;
            piv = t;
        }
        if (d.has_vertex && d.per_edge > 0) vertex_acc -= (2.0 / d.n) * ih4 / piv;
    }
    if (d.has_vertex) {
        if (vertex_acc == 0.0) throw SingularShift("count_below: exact zero pivot");
        if (vertex_acc < 0.0) ++neg;
    }
    return neg;
}

namespace {

// retries with a nudged shift when an elimination pivot lands exactly on zero
int count_below_safe(const DiscretizedGraph& d, double sigma) {
    double bump = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        try {
            return count_below(d, sigma + bump);
        } catch (const SingularShift&) {
            bump = (bump == 0.0) ? 1e-13 * (1.0 + std::abs(sigma)) : 2.0 * bump;
        }
    }
    throw SingularShift("count_below: pivot stayed singular after nudging");
}

} // namespace

OracleSpectrum oracle_eigencount(const DiscretizedGraph& d) {
    OracleSpectrum out;
    out.delta_edge = 10.0 * d.h * d.h * std::max(1.0, d.vmax);
    const double hi0 = -out.delta_edge;
    out.count = count_below_safe(d, hi0);
    double lo0 = -(d.vmax + 1.0);
    while (count_below_safe(d, lo0) > 0) lo0 *= 2.0; // Gershgorin should make this a no-op
    for (int j = 1; j <= out.count; ++j) {
        double lo = lo0, hi = hi0;
        for (int it = 0; it < 80 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (count_below_safe(d, mid) >= j) hi = mid;
            else lo = mid;
        }
        out.eigenvalues.push_back(0.5 * (lo + hi));
    }
    return out;
}

OracleSpectrum oracle_negative_spectrum(const StarGraph& g, const OracleOptions& opt) {
    double trunc = 1.0;
    for (const auto& V : g.edges) trunc = std::max(trunc, V.truncation_point(1e-10));

    double L = opt.L;
    if (L <= 0.0) {
        // enlarge the box until the shallowest bound state decays across it
        L = trunc + 10.0;
        for (int round = 0; round < 3; ++round) {
            const auto probe = oracle_eigencount(discretize(g, L, opt.h));
            if (probe.count == 0) break;
            const double kmin = std::sqrt(-probe.eigenvalues.back());
            const double need = trunc + std::max(10.0, 9.0 / kmin);
            if (need <= L) break;
            L = need;
        }
    }

    const auto d1 = discretize(g, L, opt.h);
    const auto d2 = discretize(g, L, opt.h / 2.0);
    if (static_cast<std::size_t>(d2.size()) > opt.max_unknowns)
        throw TrustRegionExceeded("oracle_negative_spectrum: refinement exceeds the unknown budget");
    const auto s1 = oracle_eigencount(d1);
    const auto s2 = oracle_eigencount(d2);
    if (s1.count != s2.count)
        throw NotConverged("oracle_negative_spectrum: counts disagree under h-refinement");
    const auto s3 = oracle_eigencount(discretize(g, 1.5 * L, opt.h));
    if (s3.count != s2.count)
        throw NotConverged("oracle_negative_spectrum: count changed when the box was enlarged");

    OracleSpectrum out;
    out.count = s2.count;
    out.delta_edge = s2.delta_edge;
    for (int i = 0; i < out.count; ++i) {
        const double e1 = s1.eigenvalues[i], e2 = s2.eigenvalues[i];
        if (std::abs(e2 - e1) > 0.05 * std::max(std::abs(e2), s2.delta_edge))
            throw NotConverged("oracle_negative_spectrum: eigenvalue not settled under h-refinement");
        out.eigenvalues.push_back((4.0 * e2 - e1) / 3.0); // h^2 Richardson
    }
    return out;
}

std::complex<double> oracle_trace_resolvent_diff(const DiscretizedGraph& d,
                                                 const DiscretizedGraph& d0,
                                                 std::complex<double> z) {
    Eigen::VectorXd shift;
    const auto supp = support_of_diff(d, d0, shift);
    if (supp.empty()) return 0.0;

    Eigen::SparseLU<Eigen::SparseMatrix<cd>> lu, lu0;
    lu.compute(shifted(d.A, z));
    lu0.compute(shifted(d0.A, z));
    if (lu.info() != Eigen::Success || lu0.info() != Eigen::Success)
        throw SingularShift("oracle_trace_resolvent_diff: shifted matrix is singular");

    // tr(R0 - R) = tr(R0 (A - A0) R) = sum_i shift_i (R e_i)^T (R0 e_i);
    // the matrices are complex symmetric, so the product is unconjugated.
    const int N = d.size();
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(N);
    cd total = 0.0;
    for (int i : supp) {
        e[i] = 1.0;
        const Eigen::VectorXcd x = lu.solve(e);
        const Eigen::VectorXcd x0 = lu0.solve(e);
        total += shift[i] * (x.transpose() * x0).value();
        e[i] = 0.0;
    }
    return total;
}

std::complex<double> oracle_determinant(const DiscretizedGraph& d0, const StarGraph& g,
                                        std::complex<double> z) {
    if (!d0.has_vertex || static_cast<int>(g.n()) != d0.n)
        throw ValidationError("oracle_determinant: grid does not match the graph");
    const int N = d0.size();
    std::vector<int> supp;
    std::vector<double> vd;
    {
        // same hat-weighted loads as discretize() so that the Birman-Schwinger
        // block matches the assembled perturbation exactly
        double v0 = 0.0;
        std::vector<std::vector<double>> brks(d0.n);
        for (int j = 0; j < d0.n; ++j) {
            brks[j] = sorted_breakpoints(g.edges[j]);
            v0 += hat_load(g.edges[j], brks[j], 0.0, d0.h);
        }
        v0 *= 2.0 / d0.n;
        if (v0 != 0.0) { supp.push_back(0); vd.push_back(v0); }
        for (int j = 0; j < d0.n; ++j)
            for (int i = 1; i <= d0.per_edge; ++i) {
                const double v = hat_load(g.edges[j], brks[j], i * d0.h, d0.h);
                if (v != 0.0) { supp.push_back(d0.index(j, i)); vd.push_back(v); }
            }
    }
    const int r = static_cast<int>(supp.size());
    if (r == 0) return 1.0;

    Eigen::SparseLU<Eigen::SparseMatrix<cd>> lu0;
    lu0.compute(shifted(d0.A, z));
    if (lu0.info() != Eigen::Success)
        throw SingularShift("oracle_determinant: shifted matrix is singular");

    Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(r, r);
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(N);
    for (int k = 0; k < r; ++k) {
        e[supp[k]] = 1.0;
        const Eigen::VectorXcd col = lu0.solve(e); // (A0 - z)^{-1} e_k
        e[supp[k]] = 0.0;
        for (int i = 0; i < r; ++i) M(i, k) += vd[i] * col[supp[i]];
    }
    return Eigen::PartialPivLU<Eigen::MatrixXcd>(M).determinant();
}

double rank2_trace_norm(std::span<const std::complex<double>> f,
                        std::span<const std::complex<double>> g) {
    if (f.size() != g.size()) throw ValidationError("rank2_trace_norm: length mismatch");
    double nf = 0.0, ng = 0.0;
    cd ip = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        nf += std::norm(f[i]);
        ng += std::norm(g[i]);
        ip += std::conj(f[i]) * g[i];
    }
    const double disc = (nf + ng) * (nf + ng) - 4.0 * std::norm(ip);
    return std::sqrt(std::max(0.0, disc));
}

double rank2_trace_norm_svd(std::span<const std::complex<double>> f,
                            std::span<const std::complex<double>> g) {
    if (f.size() != g.size()) throw ValidationError("rank2_trace_norm_svd: length mismatch");
    double nf = 0.0, ng = 0.0;
    cd ip = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        nf += std::norm(f[i]);
        ng += std::norm(g[i]);
        ip += std::conj(f[i]) * g[i];
    }
    if (nf == 0.0) return ng; // operator is -g g*
    // orthonormal basis e1 = f/|f|, e2 from g; the operator f f* - g g* there
    const double perp2 = std::max(0.0, ng - std::norm(ip) / nf);
    const double perp = std::sqrt(perp2);
    Eigen::Matrix2cd M;
    M(0, 0) = nf - std::norm(ip) / nf;
    M(1, 1) = -perp2;
    M(0, 1) = -(ip / std::sqrt(nf)) * perp;
    M(1, 0) = std::conj(M(0, 1));
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(M);
    return svd.singularValues().sum();
}

DecayFit trace_norm_decay(const DiscretizedGraph& d, const DiscretizedGraph& d0,
                          const std::vector<double>& t_list) {
    if (t_list.size() < 2) throw ValidationError("trace_norm_decay: need at least two t values");
    for (double t : t_list)
        if (!(t > 0.0) || std::sqrt(t) * d.h >= 0.1)
            throw TrustRegionExceeded("trace_norm_decay: sqrt(t) h must stay below 0.1");

    Eigen::VectorXd shift;
    const auto supp = support_of_diff(d, d0, shift);
    DecayFit fit;
    fit.t = t_list;
    if (supp.empty()) {
        fit.norm.assign(t_list.size(), 0.0);
        fit.exact_zero = true;
        return fit;
    }

    const int N = d.size(), r = static_cast<int>(supp.size());
    Eigen::SparseMatrix<double> I(N, N);
    I.setIdentity();
    std::vector<double> lx, ly;
    for (double t : t_list) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu, lu0;
        lu.compute(Eigen::SparseMatrix<double>(d.A + t * I));
        lu0.compute(Eigen::SparseMatrix<double>(d0.A + t * I));
        if (lu.info() != Eigen::Success || lu0.info() != Eigen::Success)
            throw SingularShift("trace_norm_decay: shifted matrix is singular");

        // R0 - R = R0 (A - A0) R = X Y^T with X = R0 S diag(shift), Y = R S
        Eigen::MatrixXd X(N, r), Y(N, r);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
        for (int k = 0; k < r; ++k) {
            e[supp[k]] = 1.0;
            X.col(k) = lu0.solve(e) * shift[supp[k]];
            Y.col(k) = lu.solve(e);
            e[supp[k]] = 0.0;
        }
        Eigen::HouseholderQR<Eigen::MatrixXd> qx(X), qy(Y);
        const Eigen::MatrixXd Rx = qx.matrixQR().topRows(r).triangularView<Eigen::Upper>();
        const Eigen::MatrixXd Ry = qy.matrixQR().topRows(r).triangularView<Eigen::Upper>();
        Eigen::BDCSVD<Eigen::MatrixXd> svd(Rx * Ry.transpose());
        fit.norm.push_back(svd.singularValues().sum());
        lx.push_back(std::log(t));
        ly.push_back(std::log(std::max(fit.norm.back(), 1e-300)));
    }
    fit.slope = lsq_slope(lx, ly);
    return fit;
}

} // namespace starshift::oracle
