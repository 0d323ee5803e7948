#ifndef FTL_DENSITY_HPP
#define FTL_DENSITY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ftl/errors.hpp"

namespace ftl {

/// Non-negative piecewise constant density with compact support.
/// `values[j]` is the density on [breakpoints[j], breakpoints[j+1]).
/// The function is zero outside [breakpoints.front(), breakpoints.back()].
struct PiecewiseConstantDensity {
    std::vector<double> breakpoints;
    std::vector<double> values;

    PiecewiseConstantDensity() = default;

    PiecewiseConstantDensity(std::vector<double> bp, std::vector<double> vals)
        : breakpoints(std::move(bp)), values(std::move(vals)) {
        if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size())
            throw invalid_input("piecewise density: need m+1 breakpoints for m values");
        for (std::size_t j = 0; j + 1 < breakpoints.size(); ++j)
            if (!(breakpoints[j] < breakpoints[j + 1]))
                throw invalid_input("piecewise density: breakpoints must be strictly increasing");
        for (double v : values)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw invalid_input("piecewise density: values must be finite and non-negative");
    }

    std::size_t segment_count() const { return values.size(); }

    double mass() const {
        double m = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j)
            m += values[j] * (breakpoints[j + 1] - breakpoints[j]);
        return m;
    }

    double max_value() const {
        double r = 0.0;
        for (double v : values) r = std::max(r, v);
        return r;
    }

    double operator()(double x) const {
        if (x < breakpoints.front() || x >= breakpoints.back()) return 0.0;
        auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
        std::size_t j = static_cast<std::size_t>(it - breakpoints.begin()) - 1;
        if (j >= values.size()) j = values.size() - 1;
        return values[j];
    }

    /// Integral of the density over [a, b], exact.
    double integrate(double a, double b) const {
        if (b <= a) return 0.0;
        double s = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (values[j] == 0.0) continue;
            double lo = std::max(a, breakpoints[j]);
            double hi = std::min(b, breakpoints[j + 1]);
            if (hi > lo) s += values[j] * (hi - lo);
        }
        return s;
    }

    /// Convex hull of the support: leading/trailing zero segments trimmed.
    std::pair<double, double> support_hull() const {
        std::size_t lo = 0, hi = values.size();
        while (lo < values.size() && values[lo] == 0.0) ++lo;
        while (hi > lo && values[hi - 1] == 0.0) --hi;
        if (lo == hi)
            throw invalid_input("piecewise density: identically zero");
        return {breakpoints[lo], breakpoints[hi]};
    }
};

/// Exact L1 distance of two piecewise constant densities over the union of
/// their breakpoints, both extended by zero.
inline double l1_distance(const PiecewiseConstantDensity& a, const PiecewiseConstantDensity& b) {
    std::vector<double> pts;
    pts.reserve(a.breakpoints.size() + b.breakpoints.size());
    pts.insert(pts.end(), a.breakpoints.begin(), a.breakpoints.end());
    pts.insert(pts.end(), b.breakpoints.begin(), b.breakpoints.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        double mid = 0.5 * (pts[j] + pts[j + 1]);
        s += std::abs(a(mid) - b(mid)) * (pts[j + 1] - pts[j]);
    }
    return s;
}

/// One linear piece rho(x) = slope*x + intercept on [x_lo, x_hi); used to
/// describe closed-form benchmark solutions (constant states, rarefaction
/// fans). The described function is zero off the listed pieces.
struct LinearPiece {
    double x_lo, x_hi;
    double intercept, slope;
    double at(double x) const { return intercept + slope * x; }
};

/// Exact L1 distance between a piecewise constant density and a piecewise
/// linear profile given as non-overlapping pieces (zero elsewhere).
/// Sign changes of the difference inside a cell are split at the root.
inline double l1_vs_linear(const PiecewiseConstantDensity& d, const std::vector<LinearPiece>& pieces) {
    std::vector<double> pts(d.breakpoints);
    for (const auto& p : pieces) {
        pts.push_back(p.x_lo);
        pts.push_back(p.x_hi);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    auto linear_at = [&pieces](double x, double* slope) -> double {
        for (const auto& p : pieces)
            if (x >= p.x_lo && x < p.x_hi) {
                *slope = p.slope;
                return p.at(x);
            }
        *slope = 0.0;
        return 0.0;
    };

    double s = 0.0;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        double lo = pts[j], hi = pts[j + 1];
        double mid = 0.5 * (lo + hi);
        double c = d(mid);
        double slope = 0.0;
        double vmid = linear_at(mid, &slope);
        // difference g(x) = c - (vmid + slope*(x - mid)) is linear on [lo,hi]
        double g_lo = c - (vmid + slope * (lo - mid));
        double g_hi = c - (vmid + slope * (hi - mid));
        if (g_lo * g_hi >= 0.0) {
            s += 0.5 * std::abs(g_lo + g_hi) * (hi - lo);
        } else {
            double root = lo + (hi - lo) * (g_lo / (g_lo - g_hi));
            s += 0.5 * std::abs(g_lo) * (root - lo) + 0.5 * std::abs(g_hi) * (hi - root);
        }
    }
    return s;
}

} // namespace ftl

#endif
