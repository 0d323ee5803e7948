#ifndef FTL_ATOMIZE_HPP
#define FTL_ATOMIZE_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ftl/density.hpp"
#include "ftl/errors.hpp"

namespace ftl {

/// n+1 particle positions splitting a unit-mass density into n sub-intervals
/// of equal mass ell_n = 1/n.
struct AtomizationResult {
    std::vector<double> positions;  // strictly increasing, size n+1
    double ell_n;
    int n;
    /// Largest i with positions[i] <= 0; empty when all positions are > 0.
    std::optional<int> k_n;
};

/// Equal-mass atomization by exact CDF inversion on the piecewise constant
/// density. The i-th particle sits at sup{ x : integral from x_{i-1} of the
/// density < ell_n }; on a flat stretch of the CDF this is the left edge of
/// the plateau. Endpoints are pinned to the support hull.
inline AtomizationResult atomize(const PiecewiseConstantDensity& initial, int n) {
    if (n < 2) throw invalid_input("atomize: need n >= 2");
    double mass = initial.mass();
    if (std::abs(mass - 1.0) > 1e-10)
        throw normalization_error("atomize: initial mass differs from 1 beyond 1e-10");

    auto [lo, hi] = initial.support_hull();
    const auto& bp = initial.breakpoints;
    const auto& val = initial.values;

    // cumulative mass at each breakpoint
    std::vector<double> cum(bp.size(), 0.0);
    for (std::size_t j = 0; j + 1 < bp.size(); ++j)
        cum[j + 1] = cum[j] + val[j] * (bp[j + 1] - bp[j]);

    AtomizationResult res;
    res.n = n;
    res.ell_n = 1.0 / n;
    res.positions.resize(n + 1);
    res.positions[0] = lo;
    res.positions[n] = hi;

    std::size_t j = 0;
    for (int i = 1; i < n; ++i) {
        double target = static_cast<double>(i) / n;
        while (j + 1 < cum.size() && cum[j + 1] < target) ++j;
        // now cum[j] < target (up to the == case below) and cum[j+1] >= target
        bool plateau_follows = (j + 1 < val.size()) && (val[j + 1] == 0.0);
        if (cum[j + 1] == target ||
            (plateau_follows && cum[j + 1] - target <= 1e-13 * std::max(1.0, target))) {
            // sup{ F < target } lands on the left edge of the CDF plateau
            res.positions[i] = bp[j + 1];
        } else {
            res.positions[i] = bp[j] + (target - cum[j]) / val[j];
        }
    }
    for (int i = 0; i < n; ++i)
        if (!(res.positions[i] < res.positions[i + 1]))
            throw solver_bug("atomize: positions not strictly increasing");

    res.k_n.reset();
    for (int i = n; i >= 0; --i)
        if (res.positions[i] <= 0.0) {
            res.k_n = i;
            break;
        }
    return res;
}

/// Max absolute deviation of per-interval mass from ell_n (test oracle).
inline double verify_equal_mass(const PiecewiseConstantDensity& initial, const AtomizationResult& r) {
    double worst = 0.0;
    for (int i = 0; i < r.n; ++i) {
        double m = initial.integrate(r.positions[i], r.positions[i + 1]);
        worst = std::max(worst, std::abs(m - r.ell_n));
    }
    return worst;
}

} // namespace ftl

#endif
