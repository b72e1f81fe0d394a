#pragma once

#include <string>
#include <utility>
#include <vector>

#include "starshift/errors.hpp"

namespace starshift::potentials {

// Real potential on a single half-line edge [0, inf).  All supported kinds
// are integrable with finite moments of order <= 2, which is what the
// scattering formulas downstream require.  Value semantics: cheap to copy.
class EdgePotential {
public:
    enum class Kind { Zero, SquareWell, Exponential, PiecewiseLinear, Sampled };

    static EdgePotential zero();
    // V(x) = depth on [0, width), 0 beyond.  depth may have either sign.
    static EdgePotential square_well(double depth, double width);
    // V(x) = amplitude * exp(-rate * x), rate > 0.
    static EdgePotential exponential(double amplitude, double rate);
    // Linear interpolation through (x_i, v_i); zero outside [x_front, x_back].
    // Abscissae must be nonnegative and strictly increasing.
    static EdgePotential piecewise_linear(std::vector<std::pair<double, double>> points);
    // Uniform samples v_i = V(i * dx), linearly interpolated, zero beyond the
    // last sample.
    static EdgePotential sampled(double dx, std::vector<double> values);
    // Two-column CSV "x,v" with uniform x starting at 0; blank lines and a
    // leading non-numeric header line are skipped.
    static EdgePotential sampled_from_csv(const std::string& path);

    Kind kind() const { return kind_; }
    bool is_zero() const { return kind_ == Kind::Zero; }

    double operator()(double x) const;

    // integral_0^inf x^p |V(x)| dx for p in {0,1,2}; exact per segment.
    double moment(int p) const;

    // integral_x^inf |V(t)| dt, monotone nonincreasing in x.
    double tail_bound(double x) const;

    // Smallest X >= 0 with tail_bound(X) <= eps.
    double truncation_point(double eps) const;

    // Points where V or V' jumps; integrators must place nodes here.
    std::vector<double> breakpoints() const;

    double sup_abs() const;

    // Parameter accessors (meaningful only for the matching kind).
    double depth() const { return p1_; }
    double width() const { return p2_; }
    double amplitude() const { return p1_; }
    double rate() const { return p2_; }
    double sample_dx() const { return p1_; }
    const std::vector<std::pair<double, double>>& points() const { return pts_; }
    const std::vector<double>& samples() const { return vals_; }

private:
    EdgePotential(Kind k, double p1, double p2) : kind_(k), p1_(p1), p2_(p2) {}

    Kind kind_ = Kind::Zero;
    double p1_ = 0.0;
    double p2_ = 0.0;
    std::vector<std::pair<double, double>> pts_;  // PiecewiseLinear
    std::vector<double> vals_;                    // Sampled
};

// Star graph: n >= 2 half-line edges glued at one vertex, one potential per
// edge.  The vertex coupling is always the standard continuity + current
// conservation condition, so the potentials are the whole configuration.
struct StarGraph {
    std::vector<EdgePotential> edges;

    explicit StarGraph(std::vector<EdgePotential> e) : edges(std::move(e)) {
        if (edges.size() < 2)
            throw ValidationError("star graph needs at least 2 edges, got " +
                                  std::to_string(edges.size()));
    }

    int n() const { return static_cast<int>(edges.size()); }
};

} // namespace starshift::potentials
