#ifndef FTL_SCHEME_HPP
#define FTL_SCHEME_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ftl/atomize.hpp"
#include "ftl/errors.hpp"
#include "ftl/metrics.hpp"
#include "ftl/model.hpp"

namespace ftl {

// ---------------------------------------------------------------------------
// Particle system state.
// ---------------------------------------------------------------------------

struct ParticleSystem {
    std::vector<double> x;        // n+1 strictly increasing positions
    double ell = 0.0;             // mass between consecutive particles
    CaseLabel scheme_case = CaseLabel::P1;  // upwind orientation actually used
    CaseLabel declared_case = CaseLabel::P1;
    std::optional<int> k;         // split index (P3/P4 schemes only)
    std::optional<int> pinned;    // particle frozen at exactly 0
    double t = 0.0;

    int n() const { return static_cast<int>(x.size()) - 1; }

    double min_spacing() const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < x.size(); ++i) m = std::min(m, x[i + 1] - x[i]);
        return m;
    }

    int argmin_spacing() const {
        int best = 0;
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i + 1 < static_cast<int>(x.size()); ++i)
            if (x[i + 1] - x[i] < m) {
                m = x[i + 1] - x[i];
                best = i;
            }
        return best;
    }

    bool strictly_increasing() const {
        for (std::size_t i = 0; i + 1 < x.size(); ++i)
            if (!(x[i] < x[i + 1])) return false;
        return true;
    }
};

/// Resolve the scheme for a declared case on given initial positions.
/// P3/P4 data living entirely on one side of the origin degrade to the
/// single-sided scheme matching the local drift direction. Straddling
/// P3/P4 data require 2 <= k_n <= n-3 unless `allow_small_n` is set.
inline ParticleSystem make_particle_system(std::vector<double> positions, double ell,
                                           CaseLabel declared, bool allow_small_n = false) {
    if (positions.size() < 2) throw invalid_input("particle system: need at least two particles");
    for (std::size_t i = 0; i + 1 < positions.size(); ++i)
        if (!(positions[i] < positions[i + 1]))
            throw invalid_input("particle system: positions must be strictly increasing");
    if (!(ell > 0.0)) throw invalid_input("particle system: ell must be positive");

    ParticleSystem s;
    s.x = std::move(positions);
    s.ell = ell;
    s.declared_case = declared;
    s.scheme_case = declared;
    int n = s.n();

    if (declared == CaseLabel::P3 || declared == CaseLabel::P4) {
        std::optional<int> kn;
        for (int i = n; i >= 0; --i)
            if (s.x[i] <= 0.0) {
                kn = i;
                break;
            }
        bool all_positive = !kn.has_value();
        bool all_non_positive = kn.has_value() && *kn == n;
        if (all_positive) {
            // phi >= 0 there for P3 (forward), phi <= 0 for P4 (backward)
            s.scheme_case = (declared == CaseLabel::P3) ? CaseLabel::P1 : CaseLabel::P2;
        } else if (all_non_positive) {
            s.scheme_case = (declared == CaseLabel::P3) ? CaseLabel::P2 : CaseLabel::P1;
        } else {
            s.k = kn;
            if (!allow_small_n && !(*kn >= 2 && *kn <= n - 3))
                throw invalid_input("particle system: P3/P4 needs n large enough that 2 <= k_n <= n-3");
            if (s.x[*kn] == 0.0) s.pinned = *kn;
        }
    }
    return s;
}

inline ParticleSystem make_particle_system(const AtomizationResult& a, CaseLabel declared,
                                           bool allow_small_n = false) {
    return make_particle_system(a.positions, a.ell_n, declared, allow_small_n);
}

/// R_i = ell / (x_{i+1} - x_i), the particle-level density samples.
inline std::vector<double> discrete_density_ratios(const ParticleSystem& s) {
    std::vector<double> r(s.n());
    for (int i = 0; i < s.n(); ++i) {
        double gap = s.x[i + 1] - s.x[i];
        if (!(gap > 0.0)) throw collision_error("discrete_density_ratios: particle collision");
        r[i] = s.ell / gap;
    }
    return r;
}

inline PiecewiseConstantDensity reconstruct(const ParticleSystem& s) {
    return reconstruct(s.x, s.ell);
}

// ---------------------------------------------------------------------------
// Right-hand sides of the four follow-the-leader systems.
// ---------------------------------------------------------------------------

namespace detail {

inline void check_case_compatible(const ParticleSystem& s, const Potential& pot) {
    CaseLabel pc = pot.case_label();
    if (pc == s.scheme_case) return;
    // degraded one-sided P3/P4 data run the matching single-sided scheme
    if ((pc == CaseLabel::P3 || pc == CaseLabel::P4) && pc == s.declared_case &&
        (s.scheme_case == CaseLabel::P1 || s.scheme_case == CaseLabel::P2))
        return;
    throw configuration_error(std::string("rhs: potential case ") + to_string(pc) +
                              " incompatible with scheme case " + to_string(s.scheme_case));
}

/// Velocities for raw positions under the system's scheme data.
inline void rhs_into(const ParticleSystem& s, const std::vector<double>& x,
                     const VelocityModel& vel, const Potential& pot, std::vector<double>& out) {
    const int n = static_cast<int>(x.size()) - 1;
    out.resize(n + 1);
    const double vmax = vel.v_max();
    auto R = [&](int i) {
        double gap = x[i + 1] - x[i];
        if (!(gap > 0.0)) throw collision_error("rhs: particle collision at index " + std::to_string(i));
        return s.ell / gap;
    };
    switch (s.scheme_case) {
        case CaseLabel::P1:
            for (int i = 0; i < n; ++i) out[i] = vel(R(i)) * pot(x[i]);
            out[n] = vmax * pot(x[n]);
            break;
        case CaseLabel::P2:
            out[0] = vmax * pot(x[0]);
            for (int i = 1; i <= n; ++i) out[i] = vel(R(i - 1)) * pot(x[i]);
            break;
        case CaseLabel::P3: {
            const int k = *s.k;
            out[0] = vmax * pot(x[0]);
            for (int i = 1; i <= k; ++i) out[i] = vel(R(i - 1)) * pot(x[i]);
            for (int i = k + 1; i < n; ++i) out[i] = vel(R(i)) * pot(x[i]);
            out[n] = vmax * pot(x[n]);
            break;
        }
        case CaseLabel::P4: {
            const int k = *s.k;
            for (int i = 0; i <= k; ++i) out[i] = vel(R(i)) * pot(x[i]);
            for (int i = k + 1; i <= n; ++i) out[i] = vel(R(i - 1)) * pot(x[i]);
            break;
        }
    }
    if (s.pinned) out[*s.pinned] = 0.0;
}

} // namespace detail

inline std::vector<double> rhs(const ParticleSystem& s, const VelocityModel& vel, const Potential& pot) {
    detail::check_case_compatible(s, pot);
    std::vector<double> v;
    detail::rhs_into(s, s.x, vel, pot, v);
    return v;
}

// ---------------------------------------------------------------------------
// Spacing/diameter bounds of the discrete maximum principle.
// ---------------------------------------------------------------------------

/// Lower bound on particle spacing: (ell/R_bar) e^{-L't} in cases P1-P3,
/// ell/R_max in case P4.
inline double spacing_lower_bound(double t, const ProblemConstants& c, double ell, CaseLabel cs) {
    if (t < 0.0) throw invalid_input("spacing_lower_bound: negative time");
    if (cs == CaseLabel::P4) {
        if (!c.r_max)
            throw configuration_error("spacing_lower_bound: case P4 requires a velocity cutoff (V*)");
        return ell / *c.r_max;
    }
    return ell / c.r_bar * std::exp(-c.big_l_prime * t);
}

/// Upper bound on the support diameter: W0 + 2Lt in cases P1-P3, W0 in P4.
inline double diameter_upper_bound(double t, const ProblemConstants& c, double w0, CaseLabel cs) {
    if (cs == CaseLabel::P4) return w0;
    return w0 + 2.0 * c.big_l * t;
}

// ---------------------------------------------------------------------------
// Guarded RK4 stepping.
// ---------------------------------------------------------------------------

namespace detail {

struct Rk4Scratch {
    std::vector<double> k1, k2, k3, k4, xs, xr;
};

/// One classical RK4 stage sweep; returns false (with the offending pair in
/// *bad) if any stage state or the result loses strict ordering.
inline bool try_rk4(const ParticleSystem& s, const VelocityModel& vel, const Potential& pot,
                    double dt, Rk4Scratch& w, int* bad) {
    const std::size_t m = s.x.size();
    auto ordered = [&](const std::vector<double>& y) {
        for (std::size_t i = 0; i + 1 < y.size(); ++i)
            if (!(y[i] < y[i + 1])) {
                *bad = static_cast<int>(i);
                return false;
            }
        return true;
    };
    auto blend = [&](const std::vector<double>& k, double h) {
        for (std::size_t i = 0; i < m; ++i) w.xs[i] = s.x[i] + h * k[i];
    };

    w.xs.resize(m);
    rhs_into(s, s.x, vel, pot, w.k1);
    blend(w.k1, 0.5 * dt);
    if (!ordered(w.xs)) return false;
    rhs_into(s, w.xs, vel, pot, w.k2);
    blend(w.k2, 0.5 * dt);
    if (!ordered(w.xs)) return false;
    rhs_into(s, w.xs, vel, pot, w.k3);
    blend(w.k3, dt);
    if (!ordered(w.xs)) return false;
    rhs_into(s, w.xs, vel, pot, w.k4);

    w.xr.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        w.xr[i] = s.x[i] + dt * ((w.k1[i] + 2.0 * (w.k2[i] + w.k3[i]) + w.k4[i]) / 6.0);
    if (s.pinned) w.xr[*s.pinned] = 0.0;
    return ordered(w.xr);
}

inline void advance(ParticleSystem& s, const VelocityModel& vel, const Potential& pot, double dt,
                    double dt_floor, Rk4Scratch& w) {
    if (!(dt > 0.0)) throw invalid_input("step: dt must be positive");
    int bad = 0;
    if (try_rk4(s, vel, pot, dt, w, &bad)) {
        s.x.swap(w.xr);
        s.t += dt;
        return;
    }
    double half = 0.5 * dt;
    if (half < dt_floor) {
        std::ostringstream os;
        os << "stiffness: cannot maintain particle ordering between indices " << bad << " and "
           << bad + 1 << " at t=" << s.t << " (dt floor " << dt_floor << ")";
        throw stiffness_error(os.str(), bad, bad + 1, s.t);
    }
    advance(s, vel, pot, half, dt_floor, w);
    advance(s, vel, pot, half, dt_floor, w);
}

} // namespace detail

/// RK4 advance by exactly dt; a step that would break the strict ordering is
/// retried on halved sub-steps down to dt_floor, then reported as stiffness.
inline ParticleSystem step(const ParticleSystem& s, const VelocityModel& vel, const Potential& pot,
                           double dt, double dt_floor = 0.0) {
    detail::check_case_compatible(s, pot);
    ParticleSystem out = s;
    detail::Rk4Scratch w;
    detail::advance(out, vel, pot, dt, dt_floor, w);
    return out;
}

// ---------------------------------------------------------------------------
// Dense time integration with snapshots.
// ---------------------------------------------------------------------------

struct SnapshotDiagnostics {
    double min_spacing = 0.0;
    double max_density = 0.0;
    double tv = 0.0;
    double mass = 0.0;
    double x_first = 0.0, x_last = 0.0;  // leader positions
    double spacing_bound = std::numeric_limits<double>::quiet_NaN();
    double spacing_margin = std::numeric_limits<double>::quiet_NaN();
};

struct Snapshot {
    double t;
    std::vector<double> positions;
    SnapshotDiagnostics diag;
};

struct Trajectory {
    std::vector<Snapshot> snapshots;
    double ell = 0.0;
    CaseLabel scheme_case = CaseLabel::P1;
    CaseLabel declared_case = CaseLabel::P1;
    std::optional<int> k;
    std::optional<int> pinned;
    ProblemConstants constants{};

    const Snapshot& at(std::size_t i) const { return snapshots.at(i); }
    std::size_t size() const { return snapshots.size(); }
};

struct SimulateOptions {
    double t_final = 1.0;
    std::vector<double> output_times;  // defaults to {0, t_final} when empty
    double dt_max = std::numeric_limits<double>::infinity();
    double safety = 0.5;
    double dt_floor_rel = 1e-12;  // floor = rel * t_final
};

/// Whether the discrete maximum principle bound applies to this setup
/// (P4 needs (V*); the exponential bound needs a finite L').
inline bool spacing_bound_applies(const ProblemConstants& c, CaseLabel cs) {
    if (cs == CaseLabel::P4) return c.r_max.has_value();
    return std::isfinite(c.big_l_prime);
}

/// Dense adaptive stepping: base dt = min(dt_max, safety*min_spacing/(2L)),
/// steps land exactly on every requested output time.
inline Trajectory simulate(const ParticleSystem& init, const VelocityModel& vel, const Potential& pot,
                           const SimulateOptions& opt, const ProblemConstants& constants) {
    detail::check_case_compatible(init, pot);
    if (opt.t_final < 0.0) throw invalid_input("simulate: t_final must be >= 0");
    std::vector<double> times = opt.output_times;
    if (times.empty()) times = {0.0, opt.t_final};
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0.0 || times[i] > opt.t_final)
            throw invalid_input("simulate: output times must lie in [0, t_final]");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw invalid_input("simulate: output times must be strictly increasing");
    }

    const double big_l = constants.big_l;
    if (!(big_l >= 0.0) || !std::isfinite(big_l))
        throw configuration_error("simulate: speed bound L must be finite");
    const double dt_floor = opt.dt_floor_rel * std::max(opt.t_final, 0.0);
    const bool check_bound = spacing_bound_applies(constants, init.scheme_case);

    Trajectory traj;
    traj.ell = init.ell;
    traj.scheme_case = init.scheme_case;
    traj.declared_case = init.declared_case;
    traj.k = init.k;
    traj.pinned = init.pinned;
    traj.constants = constants;

    ParticleSystem sys = init;
    detail::Rk4Scratch scratch;

    auto record = [&](double t_out) {
        Snapshot snap;
        snap.t = t_out;
        snap.positions = sys.x;
        auto d = reconstruct(sys.x, sys.ell);
        snap.diag.min_spacing = sys.min_spacing();
        snap.diag.max_density = d.max_value();
        snap.diag.tv = total_variation(d);
        snap.diag.mass = d.mass();
        snap.diag.x_first = sys.x.front();
        snap.diag.x_last = sys.x.back();
        if (check_bound) {
            snap.diag.spacing_bound = spacing_lower_bound(t_out, constants, sys.ell, sys.scheme_case);
            snap.diag.spacing_margin =
                (snap.diag.min_spacing - snap.diag.spacing_bound) / snap.diag.spacing_bound;
        }
        traj.snapshots.push_back(std::move(snap));
    };

    for (double t_out : times) {
        while (true) {
            double rem = t_out - sys.t;
            if (rem <= 1e-15 * std::max(1.0, t_out)) break;
            double cap = std::numeric_limits<double>::infinity();
            if (big_l > 0.0) cap = opt.safety * sys.min_spacing() / (2.0 * big_l);
            if (cap < dt_floor) {
                int i = sys.argmin_spacing();
                std::ostringstream os;
                os << "stiffness: spacing between indices " << i << " and " << i + 1
                   << " forces dt below floor at t=" << sys.t;
                throw stiffness_error(os.str(), i, i + 1, sys.t);
            }
            double dt = std::min({opt.dt_max, cap, rem});
            detail::advance(sys, vel, pot, dt, dt_floor, scratch);
        }
        sys.t = t_out;
        record(t_out);
    }
    return traj;
}

} // namespace ftl

#endif
