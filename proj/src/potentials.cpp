#include "starshift/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

namespace starshift::potentials {

namespace {

// integral_a^b x^p (alpha*x + beta) dx, p in {0,1,2}
double poly_segment(double a, double b, double alpha, double beta, int p) {
    auto F = [&](double x) {
        double xp1 = std::pow(x, p + 1);
        return alpha * xp1 * x / (p + 2) + beta * xp1 / (p + 1);
    };
    return F(b) - F(a);
}

// integral_a^b x^p |alpha*x + beta| dx with a >= 0
double abs_poly_segment(double a, double b, double alpha, double beta, int p) {
    if (b <= a) return 0.0;
    if (alpha != 0.0) {
        double xc = -beta / alpha;
        if (xc > a && xc < b) {
            return std::abs(poly_segment(a, xc, alpha, beta, p)) +
                   std::abs(poly_segment(xc, b, alpha, beta, p));
        }
    }
    return std::abs(poly_segment(a, b, alpha, beta, p));
}

struct Nodes {
    std::vector<double> x, v;
};

Nodes nodes_of(const EdgePotential& P) {
    Nodes nd;
    if (P.kind() == EdgePotential::Kind::PiecewiseLinear) {
        for (const auto& [x, v] : P.points()) {
            nd.x.push_back(x);
            nd.v.push_back(v);
        }
    } else {
        double dx = P.sample_dx();
        const auto& vals = P.samples();
        for (std::size_t i = 0; i < vals.size(); ++i) {
            nd.x.push_back(static_cast<double>(i) * dx);
            nd.v.push_back(vals[i]);
        }
    }
    return nd;
}

// integral over [from, inf) of x^p |V| for a node-based potential
double nodes_moment_from(const Nodes& nd, double from, int p) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < nd.x.size(); ++i) {
        double a = nd.x[i], b = nd.x[i + 1];
        double lo = std::max(a, from);
        if (lo >= b) continue;
        double alpha = (nd.v[i + 1] - nd.v[i]) / (b - a);
        double beta = nd.v[i] - alpha * a;
        acc += abs_poly_segment(lo, b, alpha, beta, p);
    }
    return acc;
}

} // namespace

EdgePotential EdgePotential::zero() { return EdgePotential(Kind::Zero, 0.0, 0.0); }

EdgePotential EdgePotential::square_well(double depth, double width) {
    if (!(width > 0.0) || !std::isfinite(width) || !std::isfinite(depth))
        throw ValidationError("square well needs finite depth and width > 0");
    return EdgePotential(Kind::SquareWell, depth, width);
}

EdgePotential EdgePotential::exponential(double amplitude, double rate) {
    if (!std::isfinite(amplitude) || !std::isfinite(rate))
        throw ValidationError("exponential potential parameters must be finite");
    if (!(rate > 0.0) && amplitude != 0.0)
        throw TailNotIntegrable("exponential potential needs rate > 0");
    return EdgePotential(Kind::Exponential, amplitude, rate > 0.0 ? rate : 1.0);
}

EdgePotential EdgePotential::piecewise_linear(std::vector<std::pair<double, double>> points) {
    if (points.size() < 2)
        throw ValidationError("piecewise linear potential needs at least 2 points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i].first) || !std::isfinite(points[i].second))
            throw ValidationError("piecewise linear point is not finite");
        if (points[i].first < 0.0)
            throw ValidationError("piecewise linear abscissae must be >= 0");
        if (i > 0 && !(points[i].first > points[i - 1].first))
            throw ValidationError("piecewise linear abscissae must be strictly increasing");
    }
    EdgePotential P(Kind::PiecewiseLinear, 0.0, 0.0);
    P.pts_ = std::move(points);
    return P;
}

EdgePotential EdgePotential::sampled(double dx, std::vector<double> values) {
    if (!(dx > 0.0) || !std::isfinite(dx))
        throw ValidationError("sampled potential needs dx > 0");
    if (values.size() < 2)
        throw ValidationError("sampled potential needs at least 2 values");
    for (double v : values)
        if (!std::isfinite(v)) throw ValidationError("sampled value is not finite");
    EdgePotential P(Kind::Sampled, dx, 0.0);
    P.vals_ = std::move(values);
    return P;
}

EdgePotential EdgePotential::sampled_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open sample file: " + path);
    std::vector<double> xs, vs;
    std::string line;
    bool first_content = true;
    while (std::getline(in, line)) {
        std::size_t pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '#') continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw SchemaError("sample file line lacks a comma: " + line);
        char* end = nullptr;
        std::string xs_str = line.substr(0, comma);
        double x = std::strtod(xs_str.c_str(), &end);
        bool x_ok = end != xs_str.c_str();
        std::string vs_str = line.substr(comma + 1);
        double v = std::strtod(vs_str.c_str(), &end);
        bool v_ok = end != vs_str.c_str();
        if (!x_ok || !v_ok) {
            if (first_content) { first_content = false; continue; } // header row
            throw SchemaError("sample file line is not numeric: " + line);
        }
        first_content = false;
        xs.push_back(x);
        vs.push_back(v);
    }
    if (xs.size() < 2) throw SchemaError("sample file needs at least 2 rows: " + path);
    double dx = xs[1] - xs[0];
    if (!(dx > 0.0)) throw SchemaError("sample abscissae must increase: " + path);
    if (std::abs(xs[0]) > 1e-12 * std::max(1.0, dx))
        throw SchemaError("sample abscissae must start at 0: " + path);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        double step = xs[i] - xs[i - 1];
        if (std::abs(step - dx) > 1e-6 * dx)
            throw SchemaError("sample abscissae must be uniform: " + path);
    }
    return sampled(dx, std::move(vs));
}

double EdgePotential::operator()(double x) const {
    if (x < 0.0) return 0.0;
    switch (kind_) {
    case Kind::Zero:
        return 0.0;
    case Kind::SquareWell:
        return x < p2_ ? p1_ : 0.0;
    case Kind::Exponential:
        return p1_ * std::exp(-p2_ * x);
    case Kind::PiecewiseLinear: {
        if (x < pts_.front().first || x > pts_.back().first) return 0.0;
        auto it = std::upper_bound(pts_.begin(), pts_.end(), x,
                                   [](double a, const auto& p) { return a < p.first; });
        if (it == pts_.begin()) return pts_.front().second;
        if (it == pts_.end()) return pts_.back().second;
        auto lo = *(it - 1);
        auto hi = *it;
        double t = (x - lo.first) / (hi.first - lo.first);
        return lo.second + t * (hi.second - lo.second);
    }
    case Kind::Sampled: {
        double end = p1_ * static_cast<double>(vals_.size() - 1);
        if (x >= end) return x == end ? vals_.back() : 0.0;
        auto n = static_cast<std::size_t>(x / p1_);
        n = std::min(n, vals_.size() - 2);
        double t = x / p1_ - static_cast<double>(n);
        return vals_[n] + t * (vals_[n + 1] - vals_[n]);
    }
    }
    return 0.0;
}

double EdgePotential::moment(int p) const {
    if (p < 0 || p > 2) throw ValidationError("moment order must be 0, 1, or 2");
    switch (kind_) {
    case Kind::Zero:
        return 0.0;
    case Kind::SquareWell:
        return std::abs(p1_) * std::pow(p2_, p + 1) / (p + 1);
    case Kind::Exponential: {
        double fact = (p == 2) ? 2.0 : 1.0;
        return std::abs(p1_) * fact / std::pow(p2_, p + 1);
    }
    case Kind::PiecewiseLinear:
    case Kind::Sampled:
        return nodes_moment_from(nodes_of(*this), 0.0, p);
    }
    return 0.0;
}

double EdgePotential::tail_bound(double x) const {
    double from = std::max(x, 0.0);
    switch (kind_) {
    case Kind::Zero:
        return 0.0;
    case Kind::SquareWell:
        return std::abs(p1_) * std::max(0.0, p2_ - from);
    case Kind::Exponential:
        return std::abs(p1_) * std::exp(-p2_ * from) / p2_;
    case Kind::PiecewiseLinear:
    case Kind::Sampled:
        return nodes_moment_from(nodes_of(*this), from, 0);
    }
    return 0.0;
}

double EdgePotential::truncation_point(double eps) const {
    if (!(eps > 0.0)) throw ValidationError("truncation tolerance must be > 0");
    if (tail_bound(0.0) <= eps) return 0.0;
    switch (kind_) {
    case Kind::SquareWell:
        return std::max(0.0, p2_ - eps / std::abs(p1_));
    case Kind::Exponential:
        return std::max(0.0, std::log(std::abs(p1_) / (p2_ * eps)) / p2_);
    default: {
        // tail_bound is continuous and nonincreasing; bisect for the
        // crossing.  Support is compact for the remaining kinds.
        double lo = 0.0;
        double hi = kind_ == Kind::PiecewiseLinear
                        ? pts_.back().first
                        : p1_ * static_cast<double>(vals_.size() - 1);
        for (int i = 0; i < 100 && hi - lo > 1e-14 * (1.0 + hi); ++i) {
            double mid = 0.5 * (lo + hi);
            (tail_bound(mid) <= eps ? hi : lo) = mid;
        }
        return hi;
    }
    }
}

std::vector<double> EdgePotential::breakpoints() const {
    switch (kind_) {
    case Kind::Zero:
    case Kind::Exponential:
        return {};
    case Kind::SquareWell:
        return {p2_};
    case Kind::PiecewiseLinear: {
        std::vector<double> out;
        for (const auto& [x, v] : pts_) out.push_back(x);
        return out;
    }
    case Kind::Sampled: {
        std::vector<double> out;
        for (std::size_t i = 1; i < vals_.size(); ++i)
            out.push_back(static_cast<double>(i) * p1_);
        return out;
    }
    }
    return {};
}

double EdgePotential::sup_abs() const {
    switch (kind_) {
    case Kind::Zero:
        return 0.0;
    case Kind::SquareWell:
    case Kind::Exponential:
        return std::abs(p1_);
    case Kind::PiecewiseLinear: {
        double m = 0.0;
        for (const auto& [x, v] : pts_) m = std::max(m, std::abs(v));
        return m;
    }
    case Kind::Sampled: {
        double m = 0.0;
        for (double v : vals_) m = std::max(m, std::abs(v));
        return m;
    }
    }
    return 0.0;
}

} // namespace starshift::potentials
