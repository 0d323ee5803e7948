#ifndef FTL_METRICS_HPP
#define FTL_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "ftl/density.hpp"
#include "ftl/errors.hpp"
#include "ftl/model.hpp"

namespace ftl {

/// Piecewise constant density carried by ordered particles: value
/// ell/(x_{i+1}-x_i) on [x_i, x_{i+1}). Total mass is n*ell exactly.
inline PiecewiseConstantDensity reconstruct(const std::vector<double>& positions, double ell) {
    if (positions.size() < 2) throw invalid_input("reconstruct: need at least two particles");
    std::vector<double> vals(positions.size() - 1);
    for (std::size_t i = 0; i + 1 < positions.size(); ++i) {
        double gap = positions[i + 1] - positions[i];
        if (!(gap > 0.0)) throw collision_error("reconstruct: positions not strictly increasing");
        vals[i] = ell / gap;
    }
    return PiecewiseConstantDensity(positions, std::move(vals));
}

/// Total variation of a compactly supported piecewise constant function:
/// both support-edge jumps plus all interior jumps.
inline double total_variation(const PiecewiseConstantDensity& d) {
    const auto& v = d.values;
    double tv = v.front() + v.back();
    for (std::size_t i = 0; i + 1 < v.size(); ++i) tv += std::abs(v[i] - v[i + 1]);
    return tv;
}

/// C1 smoothing of |z|: quadratic of width sigma around the kink.
struct SmoothedAbs {
    double sigma;
    explicit SmoothedAbs(double s) : sigma(s) {
        if (!(s > 0.0)) throw invalid_input("SmoothedAbs: sigma must be positive");
    }
    double operator()(double z) const {
        double az = std::abs(z);
        return az >= sigma ? az : z * z / (2.0 * sigma) + 0.5 * sigma;
    }
    double deriv(double z) const {
        double az = std::abs(z);
        if (az >= sigma) return z > 0.0 ? 1.0 : -1.0;
        return z / sigma;
    }
};

/// TV with interior jumps measured through the smoothed absolute value.
/// Satisfies TV <= TV_sigma <= TV + (m-1)*sigma/2 for m segments.
inline double smoothed_tv(const PiecewiseConstantDensity& d, const SmoothedAbs& eta) {
    const auto& v = d.values;
    double tv = v.front() + v.back();
    for (std::size_t i = 0; i + 1 < v.size(); ++i) tv += eta(v[i] - v[i + 1]);
    return tv;
}

// ---------------------------------------------------------------------------
// Pseudo-inverse (quantile function) of a unit-mass piecewise constant
// density and the exact 1-Wasserstein distance.
// ---------------------------------------------------------------------------

/// Piecewise linear non-decreasing map X : [0,1] -> R. Segment k carries
/// mass from z[k] to z[k+1], moving linearly from x_lo[k] to x_hi[k];
/// zero-mass gaps in the density appear as jumps (x_hi[k] < x_lo[k+1]).
struct PseudoInverse {
    std::vector<double> z;     // size K+1, z.front()=0, z.back()=1
    std::vector<double> x_lo;  // size K
    std::vector<double> x_hi;  // size K

    double operator()(double zq) const {
        if (zq <= z.front()) return x_lo.front();
        if (zq >= z.back()) return x_hi.back();
        auto it = std::upper_bound(z.begin(), z.end(), zq);
        std::size_t k = static_cast<std::size_t>(it - z.begin()) - 1;
        if (k >= x_lo.size()) k = x_lo.size() - 1;
        double w = (zq - z[k]) / (z[k + 1] - z[k]);
        return x_lo[k] + w * (x_hi[k] - x_lo[k]);
    }
};

inline PseudoInverse pseudo_inverse(const PiecewiseConstantDensity& d) {
    double mass = d.mass();
    if (!(mass > 0.0)) throw invalid_input("pseudo_inverse: zero-mass density");
    if (std::abs(mass - 1.0) > 1e-9)
        throw invalid_input("pseudo_inverse: density mass differs from 1");
    PseudoInverse X;
    X.z.push_back(0.0);
    double cum = 0.0;
    for (std::size_t j = 0; j < d.values.size(); ++j) {
        double m = d.values[j] * (d.breakpoints[j + 1] - d.breakpoints[j]);
        if (m <= 0.0) continue;  // support gap: jump in X
        cum += m;
        X.x_lo.push_back(d.breakpoints[j]);
        X.x_hi.push_back(d.breakpoints[j + 1]);
        X.z.push_back(cum);
    }
    X.z.back() = 1.0;  // absorb round-off in the last node
    return X;
}

/// Exact integral of |X1 - X2| over [0,1]: segments are merged on the union
/// of both mass grids and each linear difference is integrated in closed
/// form, splitting at interior sign changes.
inline double wasserstein1(const PseudoInverse& A, const PseudoInverse& B) {
    std::vector<double> zs;
    zs.reserve(A.z.size() + B.z.size());
    zs.insert(zs.end(), A.z.begin(), A.z.end());
    zs.insert(zs.end(), B.z.begin(), B.z.end());
    std::sort(zs.begin(), zs.end());
    zs.erase(std::unique(zs.begin(), zs.end()), zs.end());

    // per-map segment lookup for the open interval (z0, z1): both maps are
    // linear there by construction of the merged grid
    auto endpoints = [](const PseudoInverse& X, double z0, double z1, double* g0, double* g1) {
        double zm = 0.5 * (z0 + z1);
        auto it = std::upper_bound(X.z.begin(), X.z.end(), zm);
        std::size_t k = static_cast<std::size_t>(it - X.z.begin());
        k = (k == 0) ? 0 : k - 1;
        if (k >= X.x_lo.size()) k = X.x_lo.size() - 1;
        double slope = (X.x_hi[k] - X.x_lo[k]) / (X.z[k + 1] - X.z[k]);
        *g0 = X.x_lo[k] + slope * (z0 - X.z[k]);
        *g1 = X.x_lo[k] + slope * (z1 - X.z[k]);
    };

    double total = 0.0;
    for (std::size_t k = 0; k + 1 < zs.size(); ++k) {
        double z0 = zs[k], z1 = zs[k + 1];
        if (!(z1 > z0)) continue;
        double a0, a1, b0, b1;
        endpoints(A, z0, z1, &a0, &a1);
        endpoints(B, z0, z1, &b0, &b1);
        double g0 = a0 - b0, g1 = a1 - b1;
        if (g0 * g1 >= 0.0) {
            total += 0.5 * std::abs(g0 + g1) * (z1 - z0);
        } else {
            double zr = z0 + (z1 - z0) * (g0 / (g0 - g1));
            total += 0.5 * std::abs(g0) * (zr - z0) + 0.5 * std::abs(g1) * (z1 - zr);
        }
    }
    return total;
}

inline double wasserstein1(const PiecewiseConstantDensity& a, const PiecewiseConstantDensity& b) {
    if (std::abs(a.mass() - b.mass()) > 1e-9)
        throw invalid_input("wasserstein1: mass mismatch");
    return wasserstein1(pseudo_inverse(a), pseudo_inverse(b));
}

// ---------------------------------------------------------------------------
// Bound formulas.
// ---------------------------------------------------------------------------

struct TvBoundCoeffs {
    double alpha = 0.0, beta = 0.0, gamma = 0.0, zeta = 0.0;
};

/// (TV0 + alpha*t + beta*e^{L't}) * exp(gamma*t*(1+t) + zeta*e^{L't}).
/// The coefficients are problem constants the caller supplies; they are not
/// available in closed form.
inline double tv_bound(double t, double big_l_prime, double tv0, const TvBoundCoeffs& c) {
    double e = std::exp(big_l_prime * t);
    return (tv0 + c.alpha * t + c.beta * e) * std::exp(c.gamma * t * (1.0 + t) + c.zeta * e);
}

/// Sup-norm bound on the reconstructed density: R_bar * e^{L't} in cases
/// P1-P3, R_max in case P4.
inline double density_sup_bound(double t, const ProblemConstants& c, CaseLabel cs) {
    if (cs == CaseLabel::P4) {
        if (!c.r_max) throw configuration_error("density_sup_bound: case P4 requires a velocity cutoff");
        return *c.r_max;
    }
    return c.r_bar * std::exp(c.big_l_prime * t);
}

} // namespace ftl

#endif
