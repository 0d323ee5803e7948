#ifndef FTL_CLI_HPP
#define FTL_CLI_HPP

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ftl/config.hpp"
#include "ftl/ftl.hpp"
#include "ftl/io.hpp"

namespace ftl::cli {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "./out";
    std::optional<int> n_override;
    std::optional<double> t_final_override;
    std::optional<std::string> case_override;
    std::optional<int> threads_override;
};

namespace detail {

inline json load_patched_json(const CommonOpts& o) {
    std::ifstream in(o.config_path);
    if (!in) throw invalid_input("config: cannot open '" + o.config_path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw invalid_input("config: parse failure in '" + o.config_path + "': " + e.what());
    }
    if (o.case_override) j["potential"]["case"] = *o.case_override;
    if (o.t_final_override) j["harness"]["t_final"] = *o.t_final_override;
    if (o.n_override) j["harness"]["n_values"] = std::vector<int>{*o.n_override};
    if (o.threads_override) j["harness"]["threads"] = *o.threads_override;
    return j;
}

inline ParsedConfig load(const CommonOpts& o) {
    json j = load_patched_json(o);
    try {
        return parse_config(j);
    } catch (const json::exception& e) {
        throw invalid_input("config: bad schema in '" + o.config_path + "': " + e.what());
    }
}

inline std::filesystem::path ensure_out_dir(const CommonOpts& o) {
    std::filesystem::path dir(o.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw invalid_input("cannot create output directory '" + o.out_dir + "'");
    return dir;
}

inline std::string zero_pad(std::size_t k, int width = 3) {
    std::string s = std::to_string(k);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

} // namespace detail

/// `simulate`: one particle run, trajectory + per-snapshot densities.
inline int cmd_simulate(const CommonOpts& o) {
    ParsedConfig parsed = detail::load(o);
    ExperimentConfig& cfg = parsed.experiment;
    auto dir = detail::ensure_out_dir(o);

    Trajectory traj;
    if (parsed.particles) {
        auto sys = make_particle_system(parsed.particles->positions, parsed.particles->ell,
                                        cfg.potential.case_label(), /*allow_small_n=*/true);
        ProblemConstants constants;
        constants.big_l = cfg.velocity.v_max() * cfg.potential.sup_phi();
        constants.big_l_prime = cfg.velocity.v_max() * cfg.potential.sup_dphi();
        auto ratios = discrete_density_ratios(sys);
        constants.r_bar = *std::max_element(ratios.begin(), ratios.end());
        constants.r_max = cfg.velocity.r_max();
        SimulateOptions opt;
        opt.t_final = cfg.t_final;
        opt.output_times = uniform_times(cfg.t_final, cfg.num_output_times);
        opt.dt_max = cfg.dt_max_rel * cfg.t_final;
        opt.safety = cfg.safety;
        opt.dt_floor_rel = cfg.dt_floor_rel;
        traj = simulate(sys, cfg.velocity, cfg.potential, opt, constants);
    } else {
        int n = o.n_override ? *o.n_override : cfg.n_values.back();
        traj = run_particle_case(cfg, n);
    }

    write_file((dir / "trajectory.csv").string(), trajectory_csv(traj));
    write_file((dir / "trajectory.json").string(), trajectory_diagnostics_json(traj).dump(2) + "\n");
    for (std::size_t k = 0; k < traj.size(); ++k)
        write_file((dir / ("density_" + detail::zero_pad(k) + ".csv")).string(),
                   density_csv(reconstruct(traj.at(k).positions, traj.ell)));
    std::cout << "simulate: wrote " << traj.size() << " snapshots to " << dir.string() << "\n";
    return 0;
}

/// `reference`: fine Godunov run on the configured problem.
inline int cmd_reference(const CommonOpts& o) {
    ParsedConfig parsed = detail::load(o);
    ExperimentConfig& cfg = parsed.experiment;
    auto dir = detail::ensure_out_dir(o);
    auto constants = derive_constants(cfg.velocity, cfg.potential, cfg.initial);
    auto times = uniform_times(cfg.t_final, cfg.num_output_times);
    FvGrid grid = fv_window_for(cfg.initial, constants.big_l, cfg.t_final, cfg.grid_m);
    auto sol = fv_solve(cfg.initial, cfg.velocity, cfg.potential, grid, cfg.t_final, times);

    write_file((dir / "reference.csv").string(), fv_csv(sol));
    nlohmann::json j;
    j["grid_m"] = grid.m;
    j["window"] = {grid.x_lo, grid.x_hi};
    j["steps"] = sol.step_count;
    j["mass"] = nlohmann::json::array();
    for (std::size_t k = 0; k < sol.times.size(); ++k) j["mass"].push_back(sol.mass_at(k));
    write_file((dir / "reference.json").string(), j.dump(2) + "\n");
    for (std::size_t k = 0; k < sol.times.size(); ++k)
        write_file((dir / ("density_" + detail::zero_pad(k) + ".csv")).string(),
                   density_csv(sol.density_at(k)));
    std::cout << "reference: wrote " << sol.times.size() << " snapshots to " << dir.string() << "\n";
    return 0;
}

struct CheckOutcome {
    std::vector<std::string> lines;
    bool all_pass = true;

    void add(const std::string& name, bool pass, const std::string& detail) {
        lines.push_back(std::string(pass ? "[PASS] " : "[FAIL] ") + name + ": " + detail);
        all_pass = all_pass && pass;
    }
};

/// Property suite shared by `study` and `check`.
inline CheckOutcome run_property_suite(const ExperimentConfig& cfg) {
    CheckOutcome out;
    auto constants = derive_constants(cfg.velocity, cfg.potential, cfg.initial);
    double tv_bar = total_variation(cfg.initial);

    std::vector<Trajectory> runs;
    for (int n : cfg.n_values) runs.push_back(run_particle_case(cfg, n));

    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& traj = runs[i];
        int n = cfg.n_values[i];
        std::string tag = "n=" + std::to_string(n);

        if (spacing_bound_applies(constants, traj.scheme_case)) {
            double margin = check_maximum_principle(traj);
            out.add("max_principle " + tag, margin >= -cfg.tol.spacing_margin,
                    "worst margin " + fmt17(margin));
        }
        double ratio = check_w1_lipschitz(traj);
        double cap = 2.0 * constants.big_l * (1.0 + cfg.tol.w1_slack);
        out.add("w1_lipschitz " + tag, ratio <= cap,
                "worst ratio " + fmt17(ratio) + " cap " + fmt17(cap));

        double tv0 = traj.at(0).diag.tv;
        out.add("tv_initial " + tag, tv0 <= tv_bar + 1e-12,
                "TV(0) " + fmt17(tv0) + " vs TV[rho_bar] " + fmt17(tv_bar));

        double mass_drift = 0.0;
        for (const auto& s : traj.snapshots)
            mass_drift = std::max(mass_drift, std::abs(s.diag.mass - 1.0));
        out.add("mass " + tag, mass_drift <= cfg.tol.mass_tol, "drift " + fmt17(mass_drift));

        if (traj.k) {
            auto sr = check_sign_preservation(traj);
            bool pass = sr.worst_left <= cfg.tol.sign_tol && sr.worst_right <= cfg.tol.sign_tol &&
                        (traj.pinned ? sr.worst_pinned <= cfg.tol.pinned_tol
                                     : sr.worst_split <= cfg.tol.sign_tol);
            out.add("sign_preservation " + tag, pass,
                    "left " + fmt17(sr.worst_left) + " right " + fmt17(sr.worst_right) +
                        (traj.pinned ? " pinned " + fmt17(sr.worst_pinned) : ""));
        }
        if (traj.declared_case == CaseLabel::P4) {
            out.add("p4_trapping " + tag, check_p4_trapping(traj), "hull edges monotone");
            if (constants.r_max) {
                double worst = 0.0;
                for (const auto& s : traj.snapshots) worst = std::max(worst, s.diag.max_density);
                out.add("p4_sup_bound " + tag, worst <= *constants.r_max * (1.0 + 1e-6),
                        "max density " + fmt17(worst) + " vs R_max " + fmt17(*constants.r_max));
            }
        }
    }

    if (runs.size() >= 3) {
        auto tvrep = check_tv_uniform(runs);
        out.add("tv_uniform", tvrep.spread_ratio <= cfg.tol.tv_spread,
                "spread " + fmt17(tvrep.spread_ratio));
    }

    // contraction oracle on the configured datum and a shifted copy
    {
        auto [lo, hi] = cfg.initial.support_hull();
        double shift = 0.05 * (hi - lo);
        std::vector<double> bp = cfg.initial.breakpoints;
        for (double& b : bp) b += shift;
        PiecewiseConstantDensity shifted(bp, cfg.initial.values);
        double ratio = check_contraction(cfg.initial, shifted, cfg.velocity, cfg.potential,
                                         std::max(256, cfg.grid_m / 4), cfg.t_final,
                                         std::min(cfg.num_output_times, 11));
        out.add("l1_contraction", ratio <= 1.0 + cfg.tol.contraction_slack, "ratio " + fmt17(ratio));
    }
    return out;
}

/// `study`: convergence table + property suite + report files.
inline int cmd_study(const CommonOpts& o) {
    ParsedConfig parsed = detail::load(o);
    ExperimentConfig& cfg = parsed.experiment;
    auto dir = detail::ensure_out_dir(o);

    ConvergenceReport rep = run_convergence(cfg);
    CheckOutcome checks = run_property_suite(cfg);

    std::string summary;
    summary += "convergence study\n";
    summary += "  error column decreasing: " + std::string(rep.error_decreasing ? "yes" : "no") + "\n";
    summary += "  tv spread ratio: " + fmt17(rep.tv_spread_ratio) + "\n";
    for (const auto& r : rep.rows)
        summary += "  n=" + std::to_string(r.n) + " error=" + fmt17(r.l1_spacetime_error) +
                   " max_tv=" + fmt17(r.max_tv) + "\n";
    summary += "property checks\n";
    for (const auto& line : checks.lines) summary += "  " + line + "\n";

    write_file((dir / "report.csv").string(), report_csv(rep));
    nlohmann::json j = report_json(rep);
    j["checks"] = nlohmann::json::array();
    for (const auto& line : checks.lines) j["checks"].push_back(line);
    j["all_checks_pass"] = checks.all_pass;
    write_file((dir / "report.json").string(), j.dump(2) + "\n");
    write_file((dir / "summary.txt").string(), summary);
    std::cout << summary;
    return (checks.all_pass && rep.error_decreasing) ? 0 : 1;
}

/// `check`: headless property suite for CI.
inline int cmd_check(const CommonOpts& o) {
    ParsedConfig parsed = detail::load(o);
    ExperimentConfig& cfg = parsed.experiment;
    auto dir = detail::ensure_out_dir(o);
    CheckOutcome checks = run_property_suite(cfg);
    std::string summary;
    for (const auto& line : checks.lines) summary += line + "\n";
    write_file((dir / "summary.txt").string(), summary);
    std::cout << summary;
    return checks.all_pass ? 0 : 1;
}

inline int run(int argc, const char* const* argv) {
    CLI::App app{"follow-the-leader particle schemes for scalar conservation laws"};
    app.require_subcommand(1);

    CommonOpts o;
    int n_flag = -1;
    double t_flag = -1.0;
    std::string case_flag;
    int threads_flag = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "problem/experiment config (JSON)")->required();
        sub->add_option("--out", o.out_dir, "output directory (default ./out)");
        sub->add_option("--n", n_flag, "override particle-interval count");
        sub->add_option("--t-final", t_flag, "override final time");
        sub->add_option("--case", case_flag, "override case label (P1..P4)")
            ->check(CLI::IsMember({"P1", "P2", "P3", "P4"}));
        sub->add_option("--threads", threads_flag, "worker threads for study runs");
    };

    auto* sim = app.add_subcommand("simulate", "run one particle simulation");
    auto* ref = app.add_subcommand("reference", "run the finite-volume reference solver");
    auto* study = app.add_subcommand("study", "convergence study plus property checks");
    auto* check = app.add_subcommand("check", "run the property suite headlessly");
    for (auto* sub : {sim, ref, study, check}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (n_flag > 0) o.n_override = n_flag;
    if (t_flag >= 0.0) o.t_final_override = t_flag;
    if (!case_flag.empty()) o.case_override = case_flag;
    if (threads_flag > 0) o.threads_override = threads_flag;

    try {
        if (sim->parsed()) return cmd_simulate(o);
        if (ref->parsed()) return cmd_reference(o);
        if (study->parsed()) return cmd_study(o);
        if (check->parsed()) return cmd_check(o);
    } catch (const invalid_input& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const configuration_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const stiffness_error& e) {
        std::cerr << "run stopped: " << e.what() << "\n";
        return 1;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace ftl::cli

#endif
