#ifndef FTL_HARNESS_HPP
#define FTL_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ftl/atomize.hpp"
#include "ftl/density.hpp"
#include "ftl/errors.hpp"
#include "ftl/metrics.hpp"
#include "ftl/model.hpp"
#include "ftl/reference.hpp"
#include "ftl/scheme.hpp"

namespace ftl {

// ---------------------------------------------------------------------------
// Experiment configuration.
// ---------------------------------------------------------------------------

struct Tolerances {
    double spacing_margin = 1e-6;     // relative slack on the spacing bound
    double w1_slack = 1e-6;           // relative slack on the 2L Lipschitz ratio
    double tv_spread = 1.25;          // max/min ratio of max_t TV across n
    double sign_tol = 1e-9;           // sign preservation slack
    double pinned_tol = 1e-12;        // pinned-particle drift
    double contraction_slack = 1e-6;  // L1 contraction relative slack
    double mass_tol = 1e-12;          // conservation drift
};

struct ExperimentConfig {
    VelocityModel velocity = VelocityModel::linear(1.0, 1.0);
    Potential potential = Potential::constant(1.0, CaseLabel::P1);
    PiecewiseConstantDensity initial{{0.0, 1.0}, {1.0}};
    std::vector<int> n_values{50, 100, 200, 400};
    int grid_m = 4096;
    double t_final = 0.5;
    int num_output_times = 40;
    double dt_max_rel = 0.005;  // dt_max = rel * t_final
    double safety = 0.5;
    double dt_floor_rel = 1e-12;
    unsigned long seed = 42;
    int threads = 1;
    Tolerances tol;

    void validate() const {
        if (n_values.empty()) throw invalid_input("config: n_values must not be empty");
        for (std::size_t i = 0; i + 1 < n_values.size(); ++i)
            if (!(n_values[i] < n_values[i + 1]))
                throw invalid_input("config: n_values must be ascending");
        int n_max = n_values.back();
        if (grid_m < 8 * n_max)
            throw invalid_input("config: grid_m must be at least 8 * max(n_values)");
        if (!(t_final >= 0.0)) throw invalid_input("config: t_final must be >= 0");
        if (num_output_times < 2) throw invalid_input("config: need at least two output times");
    }
};

inline std::vector<double> uniform_times(double t_final, int count) {
    std::vector<double> ts(count);
    for (int i = 0; i < count; ++i) ts[i] = t_final * i / (count - 1);
    ts.front() = 0.0;
    ts.back() = t_final;
    return ts;
}

/// One full particle run for a given n: atomize, integrate, snapshot.
inline Trajectory run_particle_case(const ExperimentConfig& cfg, int n,
                                    std::optional<int> output_count = std::nullopt) {
    auto atom = atomize(cfg.initial, n);
    auto sys = make_particle_system(atom, cfg.potential.case_label());
    auto constants = derive_constants(cfg.velocity, cfg.potential, cfg.initial);
    SimulateOptions opt;
    opt.t_final = cfg.t_final;
    opt.output_times = uniform_times(cfg.t_final, output_count.value_or(cfg.num_output_times));
    opt.dt_max = cfg.dt_max_rel * std::max(cfg.t_final, 1e-300);
    opt.safety = cfg.safety;
    opt.dt_floor_rel = cfg.dt_floor_rel;
    return simulate(sys, cfg.velocity, cfg.potential, opt, constants);
}

// ---------------------------------------------------------------------------
// Property checks. All are pure functions of recorded trajectories.
// ---------------------------------------------------------------------------

/// Worst relative margin of the discrete maximum principle over all
/// snapshots: min over t of (min_spacing - bound)/bound. Pass iff >= -1e-6.
inline double check_maximum_principle(const Trajectory& traj) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& s : traj.snapshots) {
        double bound = spacing_lower_bound(s.t, traj.constants, traj.ell, traj.scheme_case);
        double min_sp = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < s.positions.size(); ++i)
            min_sp = std::min(min_sp, s.positions[i + 1] - s.positions[i]);
        worst = std::min(worst, (min_sp - bound) / bound);
    }
    return worst;
}

/// Largest W1(rho(t), rho(s)) / |t-s| over all snapshot pairs. The proof's
/// universal constant is 3L/2 in cases P1/P2 and 2L in P3/P4; pass iff
/// <= 2L(1+slack).
inline double check_w1_lipschitz(const Trajectory& traj) {
    std::vector<PseudoInverse> quantiles;
    quantiles.reserve(traj.size());
    for (const auto& s : traj.snapshots)
        quantiles.push_back(pseudo_inverse(reconstruct(s.positions, traj.ell)));
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i)
        for (std::size_t j = i + 1; j < traj.size(); ++j) {
            double dt = traj.at(j).t - traj.at(i).t;
            if (dt <= 0.0) continue;
            worst = std::max(worst, wasserstein1(quantiles[i], quantiles[j]) / dt);
        }
    return worst;
}

struct SignReport {
    double worst_left = 0.0;    // max over snapshots of max_{i<k} x_i (want <= tol)
    double worst_right = 0.0;   // max over snapshots of max_{i>k} -x_i
    double worst_pinned = 0.0;  // max |x_k| when the split particle started at 0
    double worst_split = 0.0;   // max x_k when it started strictly negative
};

inline SignReport check_sign_preservation(const Trajectory& traj) {
    SignReport r;
    if (!traj.k) return r;
    int k = *traj.k;
    for (const auto& s : traj.snapshots) {
        for (int i = 0; i < k; ++i) r.worst_left = std::max(r.worst_left, s.positions[i]);
        for (int i = k + 1; i < static_cast<int>(s.positions.size()); ++i)
            r.worst_right = std::max(r.worst_right, -s.positions[i]);
        if (traj.pinned)
            r.worst_pinned = std::max(r.worst_pinned, std::abs(s.positions[k]));
        else
            r.worst_split = std::max(r.worst_split, s.positions[k]);
    }
    return r;
}

/// Monotone trapping of the attractive case: hull edges move inward only.
inline bool check_p4_trapping(const Trajectory& traj, double tol = 1e-12) {
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        if (traj.at(i + 1).diag.x_first < traj.at(i).diag.x_first - tol) return false;
        if (traj.at(i + 1).diag.x_last > traj.at(i).diag.x_last + tol) return false;
    }
    return true;
}

/// Spread ratio max/min over n of (max_t TV); uniform BV shows as a small
/// spread. Also returns the worst TV(0) for the t=0 comparison.
struct TvUniformReport {
    double spread_ratio = 1.0;
    double worst_tv0 = 0.0;
};

inline TvUniformReport check_tv_uniform(const std::vector<Trajectory>& runs) {
    if (runs.size() < 3) throw invalid_input("check_tv_uniform: need at least 3 values of n");
    TvUniformReport rep;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& traj : runs) {
        double mx = 0.0;
        for (const auto& s : traj.snapshots) mx = std::max(mx, s.diag.tv);
        lo = std::min(lo, mx);
        hi = std::max(hi, mx);
        rep.worst_tv0 = std::max(rep.worst_tv0, traj.at(0).diag.tv);
    }
    rep.spread_ratio = hi / lo;
    return rep;
}

/// Godunov L1 contraction oracle: max over output times of
/// ||u1(t)-u2(t)||_1 / ||d1-d2||_1 (defined as 0 for identical data).
inline double check_contraction(const PiecewiseConstantDensity& d1, const PiecewiseConstantDensity& d2,
                                const VelocityModel& vel, const Potential& pot, int grid_m,
                                double t_final, int output_count) {
    double denom = l1_distance(d1, d2);
    if (denom == 0.0) return 0.0;
    double big_l = vel.v_max() * pot.sup_phi();
    auto [lo1, hi1] = d1.support_hull();
    auto [lo2, hi2] = d2.support_hull();
    std::vector<double> hull_bp{std::min(lo1, lo2), std::max(hi1, hi2)};
    PiecewiseConstantDensity hull(hull_bp, {1.0});
    FvGrid grid = fv_window_for(hull, big_l, t_final, grid_m);
    auto times = uniform_times(t_final, output_count);
    auto u1 = fv_solve(d1, vel, pot, grid, t_final, times);
    auto u2 = fv_solve(d2, vel, pot, grid, t_final, times);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        double dist = 0.0;
        const auto& a = u1.states[i];
        const auto& b = u2.states[i];
        for (int j = 0; j < grid.m; ++j) dist += std::abs(a[j] - b[j]);
        dist *= grid.dx;
        worst = std::max(worst, dist / denom);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Convergence study.
// ---------------------------------------------------------------------------

struct ConvergenceRow {
    int n = 0;
    double l1_spacetime_error = 0.0;
    double max_tv = 0.0;
    double tv0 = 0.0;
    double min_spacing_margin = 0.0;
    double w1_worst_ratio = 0.0;
    double mass_drift = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    bool error_decreasing = false;  // strict, with one <=2% adjacent exception
    double tv_spread_ratio = 0.0;
    double worst_tv0 = 0.0;
};

namespace detail {

/// Space-time L1 error by left-rectangle quadrature over the output times.
template <typename DistanceAt>
double space_time_l1(const std::vector<double>& times, DistanceAt&& dist) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        total += dist(i) * (times[i + 1] - times[i]);
    return total;
}

inline bool column_decreasing_with_slack(const std::vector<double>& err) {
    int soft_violations = 0;
    for (std::size_t i = 0; i + 1 < err.size(); ++i) {
        if (err[i + 1] < err[i]) continue;
        if (err[i + 1] <= err[i] * 1.02) {
            if (++soft_violations > 1) return false;
        } else {
            return false;
        }
    }
    return true;
}

} // namespace detail

/// Particle-vs-Godunov convergence study: for each n, atomize -> simulate ->
/// reconstruct -> space-time L1 error against the fine finite-volume oracle.
inline ConvergenceReport run_convergence(const ExperimentConfig& cfg) {
    cfg.validate();
    auto constants = derive_constants(cfg.velocity, cfg.potential, cfg.initial);
    auto times = uniform_times(cfg.t_final, cfg.num_output_times);
    FvGrid grid = fv_window_for(cfg.initial, constants.big_l, cfg.t_final, cfg.grid_m);
    auto oracle = fv_solve(cfg.initial, cfg.velocity, cfg.potential, grid, cfg.t_final, times);
    std::vector<PiecewiseConstantDensity> oracle_densities;
    oracle_densities.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) oracle_densities.push_back(oracle.density_at(i));

    auto run_one = [&](int n) {
        ConvergenceRow row;
        row.n = n;
        Trajectory traj = run_particle_case(cfg, n);
        row.l1_spacetime_error = detail::space_time_l1(times, [&](std::size_t i) {
            return l1_distance(reconstruct(traj.at(i).positions, traj.ell), oracle_densities[i]);
        });
        for (const auto& s : traj.snapshots) {
            row.max_tv = std::max(row.max_tv, s.diag.tv);
            row.mass_drift = std::max(row.mass_drift, std::abs(s.diag.mass - 1.0));
        }
        row.tv0 = traj.at(0).diag.tv;
        row.min_spacing_margin = check_maximum_principle(traj);
        row.w1_worst_ratio = check_w1_lipschitz(traj);
        return row;
    };

    ConvergenceReport rep;
    rep.rows.resize(cfg.n_values.size());
    if (cfg.threads > 1) {
        std::vector<std::future<ConvergenceRow>> futs;
        futs.reserve(cfg.n_values.size());
        for (int n : cfg.n_values)
            futs.push_back(std::async(std::launch::async, run_one, n));
        for (std::size_t i = 0; i < futs.size(); ++i) rep.rows[i] = futs[i].get();
    } else {
        for (std::size_t i = 0; i < cfg.n_values.size(); ++i) rep.rows[i] = run_one(cfg.n_values[i]);
    }

    std::vector<double> err;
    std::vector<double> max_tvs;
    for (const auto& r : rep.rows) {
        err.push_back(r.l1_spacetime_error);
        max_tvs.push_back(r.max_tv);
    }
    rep.error_decreasing = detail::column_decreasing_with_slack(err);
    double lo = *std::min_element(max_tvs.begin(), max_tvs.end());
    double hi = *std::max_element(max_tvs.begin(), max_tvs.end());
    rep.tv_spread_ratio = hi / lo;
    for (const auto& r : rep.rows) rep.worst_tv0 = std::max(rep.worst_tv0, r.tv0);
    return rep;
}

// ---------------------------------------------------------------------------
// Entropy verification.
// ---------------------------------------------------------------------------

/// Standard k-grid straddling every shock level in the benchmarks.
inline std::vector<double> standard_k_grid(double r_bar) {
    return {0.0, 0.25 * r_bar, 0.5 * r_bar, 0.75 * r_bar, r_bar, 1.25 * r_bar};
}

/// Tensor bump bank: 3 spatial centers x 2 spatial widths x 2 temporal
/// centers (temporal radius fixed at T/4, supports strictly inside (0,T)).
inline std::vector<SpaceTimeBump> standard_test_bank(const std::vector<double>& x_centers,
                                                     const std::vector<double>& x_radii,
                                                     double t_final) {
    std::vector<SpaceTimeBump> bank;
    for (double tc : {0.375 * t_final, 0.625 * t_final})
        for (double xc : x_centers)
            for (double xr : x_radii) {
                SpaceTimeBump b;
                b.space = CubicBump{xc, xr};
                b.time = CubicBump{tc, 0.25 * t_final};
                bank.push_back(b);
            }
    return bank;
}

struct EntropyCell {
    int n;
    double k;
    int bump_index;
    double residual;
};

struct EntropyReport {
    std::vector<EntropyCell> table;
    std::vector<int> n_values;
    std::vector<double> min_residual_per_n;
    double fitted_c = 0.0;  // max over n of n * max(0, -min_residual)
};

inline SpaceTimeField field_from_trajectory(const Trajectory& traj) {
    SpaceTimeField f;
    f.reserve(traj.size());
    for (const auto& s : traj.snapshots)
        f.emplace_back(s.t, reconstruct(s.positions, traj.ell));
    return f;
}

inline EntropyReport check_entropy(const std::vector<std::pair<int, SpaceTimeField>>& fields,
                                   const std::vector<double>& k_grid,
                                   const std::vector<SpaceTimeBump>& bank, const Potential& pot,
                                   const VelocityModel& vel, std::pair<double, double> window,
                                   int n_refine = 256) {
    EntropyReport rep;
    for (const auto& [n, field] : fields) {
        double worst = std::numeric_limits<double>::infinity();
        for (double k : k_grid)
            for (std::size_t b = 0; b < bank.size(); ++b) {
                double r = entropy_residual(field, k, bank[b], pot, vel, window, n_refine);
                rep.table.push_back({n, k, static_cast<int>(b), r});
                worst = std::min(worst, r);
            }
        rep.n_values.push_back(n);
        rep.min_residual_per_n.push_back(worst);
        rep.fitted_c = std::max(rep.fitted_c, n * std::max(0.0, -worst));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Closed-form benchmark: block datum on [0,1] under v(rho)=1-rho, phi=1.
// Standing shock at x=0 (admissible: f(0)=f(1)=0) and a centered
// rarefaction fan opening at x=1; valid while t < 1.
// ---------------------------------------------------------------------------

inline std::vector<LinearPiece> lwr_block_exact_pieces(double t) {
    if (t < 0.0 || t >= 1.0) throw invalid_input("lwr_block_exact_pieces: need 0 <= t < 1");
    if (t == 0.0) return {{0.0, 1.0, 1.0, 0.0}};
    std::vector<LinearPiece> pieces;
    pieces.push_back({0.0, 1.0 - t, 1.0, 0.0});
    // rho = (1 - (x-1)/t)/2 on [1-t, 1+t]
    pieces.push_back({1.0 - t, 1.0 + t, (t + 1.0) / (2.0 * t), -1.0 / (2.0 * t)});
    return pieces;
}

/// Space-time L1 error of a particle run against the closed-form block
/// solution (exact piecewise-linear integration).
inline double block_benchmark_error_vs_exact(const Trajectory& traj) {
    std::vector<double> times;
    for (const auto& s : traj.snapshots) times.push_back(s.t);
    return detail::space_time_l1(times, [&](std::size_t i) {
        return l1_vs_linear(reconstruct(traj.at(i).positions, traj.ell),
                            lwr_block_exact_pieces(times[i]));
    });
}

// ---------------------------------------------------------------------------
// Attractive-case blow-up demonstrator: two symmetric particles at +-x0
// carrying mass ell between them. Without a velocity cutoff the pair races
// toward the origin and the adaptive step collapses below its floor; with
// (V*) enabled the spacing freezes at ell/R_max and the run completes.
// ---------------------------------------------------------------------------

struct BlowupDemoResult {
    bool stiffness_hit = false;
    double stop_time = 0.0;
    double final_spacing = 0.0;
    double min_spacing_margin = std::numeric_limits<double>::quiet_NaN();
};

inline BlowupDemoResult run_blowup_demo(const VelocityModel& vel, double alpha, double x0,
                                        double ell, double t_max, int output_count = 21) {
    if (!(x0 > 0.0) || !(ell > 0.0)) throw invalid_input("blowup demo: x0 and ell must be positive");
    Potential pot = Potential::power_abs(-1.0, alpha, CaseLabel::P4, {-1.5 * x0, 1.5 * x0});
    auto sys = make_particle_system({-x0, x0}, ell, CaseLabel::P4, /*allow_small_n=*/true);

    ProblemConstants constants;
    constants.big_l = vel.v_max() * pot.sup_phi();
    constants.big_l_prime = vel.v_max() * pot.sup_dphi();
    constants.r_bar = ell / (2.0 * x0);
    constants.r_max = vel.r_max();

    SimulateOptions opt;
    opt.t_final = t_max;
    opt.output_times = uniform_times(t_max, output_count);

    BlowupDemoResult res;
    try {
        Trajectory traj = simulate(sys, vel, pot, opt, constants);
        res.stop_time = t_max;
        res.final_spacing = traj.snapshots.back().diag.min_spacing;
        if (constants.r_max) res.min_spacing_margin = check_maximum_principle(traj);
    } catch (const stiffness_error& e) {
        res.stiffness_hit = true;
        res.stop_time = e.time;
        res.final_spacing = 0.0;
    }
    return res;
}

} // namespace ftl

#endif
