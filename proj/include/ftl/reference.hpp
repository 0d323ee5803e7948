#ifndef FTL_REFERENCE_HPP
#define FTL_REFERENCE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "ftl/density.hpp"
#include "ftl/errors.hpp"
#include "ftl/model.hpp"

namespace ftl {

// ---------------------------------------------------------------------------
// Godunov numerical flux for f(rho) = rho * v(rho), scaled by phi at the
// interface; negative phi mirrors the upwind orientation (x -> -x symmetry).
// ---------------------------------------------------------------------------

namespace detail {

/// Candidate interior extrema of f(rho) = rho*v(rho) inside (lo, hi),
/// exact per analytic family; per-segment quadratic extrema for tables.
inline void flux_critical_points(const VelocityModel& vel, double lo, double hi,
                                 std::vector<double>& out) {
    out.clear();
    auto push = [&](double r) {
        if (r > lo && r < hi) out.push_back(r);
    };
    switch (vel.form()) {
        case VelocityForm::linear:
            push(0.5 * vel.rho_ref());
            push(vel.rho_ref());
            break;
        case VelocityForm::reciprocal:
            if (vel.r_max()) {
                double r = *vel.r_max();
                push(std::sqrt(1.0 + r) - 1.0);
                push(r);
            }
            // without cutoff f is strictly increasing: endpoints suffice
            break;
        case VelocityForm::table: {
            // v is linear between nodes, so f is quadratic per segment:
            // stationary points and the nodes themselves are the candidates
            if (vel.r_max()) push(*vel.r_max());
            const auto& nodes = vel.table_nodes();
            for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
                double a = nodes[s].first, b = nodes[s + 1].first;
                push(a);
                push(b);
                double va = nodes[s].second, vb = nodes[s + 1].second;
                double slope = (vb - va) / (b - a);
                if (slope == 0.0) continue;
                // f(r) = r*(va + slope*(r-a)) on [a,b]
                double rc = 0.5 * (a - va / slope);
                if (rc > a && rc < b) push(rc);
            }
            break;
        }
    }
}

} // namespace detail

/// Standard Godunov state flux G(a, b) for f(rho)=rho*v(rho):
/// min of f over [a,b] when a <= b, max of f over [b,a] otherwise.
inline double godunov_state_flux(const VelocityModel& vel, double a, double b) {
    auto f = [&vel](double r) { return r * vel(r); };
    if (a == b) return f(a);
    double lo = std::min(a, b), hi = std::max(a, b);
    static thread_local std::vector<double> crit;
    detail::flux_critical_points(vel, lo, hi, crit);
    double fa = f(lo), fb = f(hi);
    if (a < b) {
        double m = std::min(fa, fb);
        for (double r : crit) m = std::min(m, f(r));
        return m;
    }
    double m = std::max(fa, fb);
    for (double r : crit) m = std::max(m, f(r));
    return m;
}

inline double godunov_interface_flux(double rho_left, double rho_right, double phi_iface,
                                     const VelocityModel& vel) {
    if (rho_left < 0.0 || rho_right < 0.0)
        throw domain_error("godunov flux: negative density state");
    if (phi_iface >= 0.0) return phi_iface * godunov_state_flux(vel, rho_left, rho_right);
    return phi_iface * godunov_state_flux(vel, rho_right, rho_left);
}

// ---------------------------------------------------------------------------
// Exact Riemann solution for the homogeneous LWR flux v(rho)=v_max(1-rho/rho_ref),
// valid for constant phi = 1. Benchmark oracle only.
// ---------------------------------------------------------------------------

inline double exact_lwr_riemann(double rho_left, double rho_right, double xi, double v_max = 1.0,
                                double rho_ref = 1.0) {
    if (rho_left < 0.0 || rho_left > rho_ref || rho_right < 0.0 || rho_right > rho_ref)
        throw invalid_input("exact_lwr_riemann: states must lie in [0, rho_ref]");
    auto f = [&](double r) { return v_max * r * (1.0 - r / rho_ref); };
    if (rho_left == rho_right) return rho_left;
    if (rho_left < rho_right) {
        double s = (f(rho_right) - f(rho_left)) / (rho_right - rho_left);
        return xi < s ? rho_left : rho_right;
    }
    // rarefaction: f'(r) = v_max*(1 - 2r/rho_ref), decreasing in r
    auto fp = [&](double r) { return v_max * (1.0 - 2.0 * r / rho_ref); };
    if (xi <= fp(rho_left)) return rho_left;
    if (xi >= fp(rho_right)) return rho_right;
    return 0.5 * rho_ref * (1.0 - xi / v_max);
}

// ---------------------------------------------------------------------------
// Finite-volume solver (first-order Godunov, forward Euler, CFL 0.45).
// ---------------------------------------------------------------------------

struct FvGrid {
    double x_lo = 0.0, x_hi = 1.0;
    int m = 0;
    double dx = 0.0;

    static FvGrid make(double lo, double hi, int m) {
        if (!(hi > lo) || m < 2) throw invalid_input("FvGrid: bad window or cell count");
        FvGrid g;
        g.x_lo = lo;
        g.x_hi = hi;
        g.m = m;
        g.dx = (hi - lo) / m;
        return g;
    }

    double interface_x(int j) const { return x_lo + j * dx; }
    double center(int j) const { return x_lo + (j + 0.5) * dx; }
};

/// Window sized so the boundary never sees mass: support hull inflated by
/// the exact transport distance L*t_final, the first-order scheme's
/// diffusive front smear (~sqrt(L dx t)), and ten cells of slack.
inline FvGrid fv_window_for(const PiecewiseConstantDensity& initial, double big_l, double t_final,
                            int m) {
    auto [lo, hi] = initial.support_hull();
    if (m <= 20) throw invalid_input("fv_window_for: need more than 20 cells");
    double dx = (hi - lo) / m;
    double inflate = 0.0;
    for (int it = 0; it < 3; ++it) {
        inflate = big_l * t_final + 6.0 * std::sqrt(std::max(big_l * t_final * dx, 0.0)) + 10.0 * dx;
        dx = ((hi - lo) + 2.0 * inflate) / m;
    }
    return FvGrid::make(lo - inflate, hi + inflate, m);
}

struct FvSolution {
    FvGrid grid;
    std::vector<double> times;
    std::vector<std::vector<double>> states;  // cell averages per output time
    long step_count = 0;

    PiecewiseConstantDensity density_at(std::size_t idx) const {
        std::vector<double> bp(grid.m + 1);
        for (int j = 0; j <= grid.m; ++j) bp[j] = grid.interface_x(j);
        return PiecewiseConstantDensity(std::move(bp), states.at(idx));
    }

    double mass_at(std::size_t idx) const {
        // compensated summation so the conservation diagnostic is not
        // polluted by the accumulator itself
        long double s = 0.0L;
        for (double v : states.at(idx)) s += static_cast<long double>(v);
        return static_cast<double>(s) * grid.dx;
    }
};

inline FvSolution fv_solve(const PiecewiseConstantDensity& initial, const VelocityModel& vel,
                           const Potential& pot, const FvGrid& grid, double t_final,
                           const std::vector<double>& output_times, double cfl = 0.45) {
    if (t_final < 0.0) throw invalid_input("fv_solve: t_final must be >= 0");
    std::vector<double> times = output_times;
    if (times.empty()) times = {0.0, t_final};
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0.0 || times[i] > t_final)
            throw invalid_input("fv_solve: output times must lie in [0, t_final]");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw invalid_input("fv_solve: output times must be strictly increasing");
    }

    const int m = grid.m;
    std::vector<double> iface_phi(m + 1);
    double phi_max = 0.0;
    for (int j = 0; j <= m; ++j) {
        iface_phi[j] = pot(grid.interface_x(j));
        phi_max = std::max(phi_max, std::abs(iface_phi[j]));
    }

    std::vector<double> cells(m);
    for (int j = 0; j < m; ++j)
        cells[j] = initial.integrate(grid.interface_x(j), grid.interface_x(j + 1)) / grid.dx;

    FvSolution sol;
    sol.grid = grid;

    std::vector<double> flux(m + 1);
    double t = 0.0;
    for (double t_out : times) {
        while (true) {
            double rem = t_out - t;
            if (rem <= 1e-15 * std::max(1.0, t_out)) break;
            double rho_max = 0.0;
            for (double c : cells) rho_max = std::max(rho_max, c);
            // |d/drho (f(rho) phi)| <= phi_max * (v_max + lip * rho)
            double speed = phi_max * (vel.v_max() + vel.lipschitz() * rho_max);
            double dt = (speed > 0.0) ? std::min(cfl * grid.dx / speed, rem) : rem;

            // window edges carry no flux: the window is sized so the support
            // (plus front smear) never reaches them, and zeroing the edge
            // fluxes makes conservation exact in floating point too
            flux[0] = 0.0;
            for (int j = 1; j < m; ++j)
                flux[j] = godunov_interface_flux(cells[j - 1], cells[j], iface_phi[j], vel);
            flux[m] = 0.0;

            double r = dt / grid.dx;
            for (int j = 0; j < m; ++j) {
                cells[j] -= r * (flux[j + 1] - flux[j]);
                if (cells[j] < 0.0) {
                    if (cells[j] < -1e-13)
                        throw solver_bug("fv_solve: cell went negative beyond round-off");
                    cells[j] = 0.0;
                }
            }
            t += dt;
            ++sol.step_count;
        }
        t = t_out;
        sol.times.push_back(t_out);
        sol.states.push_back(cells);
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Kruzkov entropy residual on a space-time field of piecewise constant
// densities (snapshots treated as constant on each time slab).
// ---------------------------------------------------------------------------

/// C^2 bump built on the cubic B-spline shape, support [center-r, center+r],
/// with exact derivative and antiderivative.
struct CubicBump {
    double center = 0.0;
    double radius = 1.0;

    double support_lo() const { return center - radius; }
    double support_hi() const { return center + radius; }

    static double b3(double u) {
        double a = std::abs(u);
        if (a >= 2.0) return 0.0;
        if (a >= 1.0) {
            double w = 2.0 - a;
            return w * w * w / 6.0;
        }
        return (4.0 - 6.0 * u * u + 3.0 * a * a * a) / 6.0;
    }

    static double b3_deriv(double u) {
        double a = std::abs(u);
        if (a >= 2.0) return 0.0;
        double s = u >= 0.0 ? 1.0 : -1.0;
        if (a >= 1.0) {
            double w = 2.0 - a;
            return -s * 0.5 * w * w;
        }
        return -2.0 * u + 1.5 * a * u;
    }

    /// Antiderivative of b3 with value 0 at -2 and 1 at +2.
    static double b3_integral(double u) {
        if (u <= -2.0) return 0.0;
        if (u >= 2.0) return 1.0;
        double a = std::abs(u);
        double tail;  // integral of b3 from max(a,.) outward mirrored
        if (a >= 1.0) {
            double w = 2.0 - a;
            tail = w * w * w * w / 24.0;
        } else {
            // 1 - F(a) for a in [0,1], F from the inner branch
            tail = 0.5 - (4.0 * a - 2.0 * a * a * a + 0.75 * a * a * a * a) / 6.0;
        }
        return u >= 0.0 ? 1.0 - tail : tail;
    }

    double operator()(double x) const { return b3(2.0 * (x - center) / radius); }
    double deriv(double x) const { return b3_deriv(2.0 * (x - center) / radius) * 2.0 / radius; }
    double integral(double a, double b) const {
        double ua = 2.0 * (a - center) / radius;
        double ub = 2.0 * (b - center) / radius;
        return (b3_integral(ub) - b3_integral(ua)) * radius / 2.0;
    }
};

/// Tensor test function psi(x,t) = B(x) * C(t).
struct SpaceTimeBump {
    CubicBump space;
    CubicBump time;
};

using SpaceTimeField = std::vector<std::pair<double, PiecewiseConstantDensity>>;

/// Triple-term Kruzkov integral for entropy level k and test function psi:
///   |rho-k| psi_t + sgn(rho-k)(f(rho)-f(k)) phi psi_x - sgn(rho-k) f(k) phi' psi
/// integrated over the field's own grid (slabs in time, merged cells with a
/// uniform refinement in space). Entropy solutions keep it >= -tolerance.
inline double entropy_residual(const SpaceTimeField& field, double k, const SpaceTimeBump& psi,
                               const Potential& pot, const VelocityModel& vel,
                               std::pair<double, double> space_window, int n_refine = 256) {
    if (field.size() < 2) throw invalid_input("entropy_residual: need at least two snapshots");
    if (k < 0.0) throw invalid_input("entropy_residual: k must be >= 0");
    double t0 = field.front().first, t1 = field.back().first;
    if (psi.time.support_lo() <= t0 || psi.time.support_hi() >= t1)
        throw invalid_input("entropy_residual: temporal support must lie strictly inside the field window");
    if (psi.space.support_lo() <= space_window.first || psi.space.support_hi() >= space_window.second)
        throw invalid_input("entropy_residual: spatial support must lie strictly inside the window");

    auto f = [&vel](double r) { return r * vel(r); };
    const double fk = f(k);
    auto sgn = [](double y) { return y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0); };

    const double xa = psi.space.support_lo(), xb = psi.space.support_hi();

    double total = 0.0;
    std::vector<double> pts;
    for (std::size_t j = 0; j + 1 < field.size(); ++j) {
        double ta = field[j].first, tb = field[j + 1].first;
        double c_a = psi.time(ta), c_b = psi.time(tb);
        double c_diff = c_b - c_a;
        double c_int = psi.time.integral(ta, tb);
        if (c_diff == 0.0 && c_int == 0.0) continue;

        const PiecewiseConstantDensity& d = field[j].second;
        pts.clear();
        pts.push_back(xa);
        pts.push_back(xb);
        for (double b : d.breakpoints)
            if (b > xa && b < xb) pts.push_back(b);
        for (int q = 1; q < n_refine; ++q) pts.push_back(xa + (xb - xa) * q / n_refine);
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

        for (std::size_t c = 0; c + 1 < pts.size(); ++c) {
            double a = pts[c], b = pts[c + 1];
            double w = b - a;
            double mid = 0.5 * (a + b);
            double rho = d(mid);
            double s = sgn(rho - k);
            total += std::abs(rho - k) * psi.space.integral(a, b) * c_diff;
            if (s != 0.0) {
                total += s * (f(rho) - fk) * pot(mid) * psi.space.deriv(mid) * w * c_int;
                total -= s * fk * pot.deriv(mid) * psi.space(mid) * w * c_int;
            }
        }
    }
    return total;
}

} // namespace ftl

#endif
