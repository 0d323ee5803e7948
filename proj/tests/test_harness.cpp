#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ftl/harness.hpp"
#include "ftl/io.hpp"

using namespace ftl;

namespace {

ExperimentConfig tiny_static_config() {
    ExperimentConfig cfg;
    cfg.velocity = VelocityModel::linear(1.0, 1.0);
    cfg.potential = Potential::constant(0.0, CaseLabel::P1);
    cfg.initial = PiecewiseConstantDensity({0.0, 0.4, 1.0}, {1.5, 2.0 / 3.0});
    cfg.n_values = {8, 16, 32};
    cfg.grid_m = 256;
    cfg.t_final = 0.25;
    cfg.num_output_times = 5;
    return cfg;
}

} // namespace

TEST_CASE("run_convergence: zero dynamics reduces to projection error") {
    auto cfg = tiny_static_config();
    auto rep = run_convergence(cfg);
    REQUIRE(rep.rows.size() == 3);
    for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i)
        CHECK(rep.rows[i + 1].l1_spacetime_error < rep.rows[i].l1_spacetime_error);
    CHECK(rep.error_decreasing);
    for (const auto& r : rep.rows) {
        CHECK(r.mass_drift <= 1e-12);
        CHECK(r.min_spacing_margin >= -1e-9);
        CHECK(r.w1_worst_ratio <= 1e-12);  // nothing moves
        CHECK(r.l1_spacetime_error > 0.0);
        CHECK(std::isfinite(r.l1_spacetime_error));
    }
    CHECK(rep.tv_spread_ratio <= 1.25);
    CHECK(rep.worst_tv0 <= total_variation(cfg.initial) + 1e-12);
}

TEST_CASE("run_convergence validates its config") {
    auto cfg = tiny_static_config();
    cfg.grid_m = 100;  // < 8 * 32
    CHECK_THROWS_AS(run_convergence(cfg), invalid_input);
    cfg = tiny_static_config();
    cfg.n_values = {32, 16};
    CHECK_THROWS_AS(run_convergence(cfg), invalid_input);
}

TEST_CASE("reports are deterministic") {
    auto cfg = tiny_static_config();
    auto r1 = run_convergence(cfg);
    auto r2 = run_convergence(cfg);
    CHECK(report_csv(r1) == report_csv(r2));
    cfg.threads = 3;
    auto r3 = run_convergence(cfg);
    CHECK(report_csv(r1) == report_csv(r3));
}

TEST_CASE("w1 lipschitz control: rigid translation has ratio exactly L") {
    ExperimentConfig cfg;
    cfg.velocity = VelocityModel::table({0.0, 10.0}, {1.0, 1.0}, 0.0);
    cfg.potential = Potential::constant(1.0, CaseLabel::P1);
    cfg.initial = PiecewiseConstantDensity({0.0, 1.0}, {1.0});
    cfg.n_values = {16};
    cfg.grid_m = 256;
    cfg.t_final = 0.5;
    cfg.num_output_times = 6;
    auto traj = run_particle_case(cfg, 16);
    double big_l = cfg.velocity.v_max() * cfg.potential.sup_phi();
    double ratio = check_w1_lipschitz(traj);
    CHECK(std::abs(ratio - big_l) <= 1e-9);
}

TEST_CASE("check_tv_uniform needs three runs and sees flat TV") {
    auto cfg = tiny_static_config();
    std::vector<Trajectory> runs;
    for (int n : cfg.n_values) runs.push_back(run_particle_case(cfg, n));
    auto rep = check_tv_uniform(runs);
    CHECK(rep.spread_ratio <= 1.25);
    CHECK_THROWS_AS(check_tv_uniform({runs[0], runs[1]}), invalid_input);
}

TEST_CASE("lwr block closed-form solution") {
    // mass is conserved along the fan
    for (double t : {0.0, 0.2, 0.5, 0.9}) {
        auto pieces = lwr_block_exact_pieces(t);
        double mass = 0.0;
        for (const auto& p : pieces) mass += (p.at(p.x_lo) + p.at(p.x_hi)) * 0.5 * (p.x_hi - p.x_lo);
        CHECK(mass == Catch::Approx(1.0).margin(1e-12));
    }
    CHECK_THROWS_AS(lwr_block_exact_pieces(1.0), invalid_input);

    // l1_vs_linear: compare a coarse block against the t=0 profile
    PiecewiseConstantDensity half({0.0, 1.0}, {0.5});
    double d = l1_vs_linear(half, lwr_block_exact_pieces(0.0));
    CHECK(d == Catch::Approx(0.5).margin(1e-14));
}

TEST_CASE("block benchmark error vs exact decreases with n") {
    ExperimentConfig cfg;
    cfg.velocity = VelocityModel::linear(1.0, 1.0);
    cfg.potential = Potential::constant(1.0, CaseLabel::P1);
    cfg.initial = PiecewiseConstantDensity({0.0, 1.0}, {1.0});
    cfg.t_final = 0.5;
    cfg.num_output_times = 11;
    cfg.grid_m = 512;
    std::vector<double> errs;
    for (int n : {16, 32, 64}) errs.push_back(block_benchmark_error_vs_exact(run_particle_case(cfg, n)));
    CHECK(errs[1] < errs[0]);
    CHECK(errs[2] < errs[1]);
}

TEST_CASE("entropy report fits C and fills the table") {
    ExperimentConfig cfg;
    cfg.velocity = VelocityModel::linear(1.0, 1.0);
    cfg.potential = Potential::constant(1.0, CaseLabel::P1);
    cfg.initial = PiecewiseConstantDensity({0.0, 1.0}, {1.0});
    cfg.t_final = 0.5;
    std::vector<std::pair<int, SpaceTimeField>> fields;
    for (int n : {24, 48}) {
        auto traj = run_particle_case(cfg, n, 41);
        fields.emplace_back(n, field_from_trajectory(traj));
    }
    auto bank = standard_test_bank({0.0, 0.5, 1.0}, {0.5, 0.25}, cfg.t_final);
    CHECK(bank.size() == 12);
    auto k_grid = standard_k_grid(1.0);
    auto rep = check_entropy(fields, k_grid, bank, cfg.potential, cfg.velocity, {-3.0, 4.0}, 128);
    CHECK(rep.table.size() == 2 * k_grid.size() * bank.size());
    REQUIRE(rep.min_residual_per_n.size() == 2);
    CHECK(rep.fitted_c >= 0.0);
    for (double r : rep.min_residual_per_n) CHECK(std::isfinite(r));
}

TEST_CASE("blow-up demonstrator: cutoff rescues the run") {
    // tiny version of the attractive two-particle configuration; the
    // acceptance suite runs it at full scale
    auto cut = VelocityModel::reciprocal_cutoff(1.0, 1e-4);
    auto res = run_blowup_demo(cut, 0.5, 1.0, 1e-6, 2.0, 5);
    CHECK_FALSE(res.stiffness_hit);
    CHECK(res.stop_time == 2.0);
    CHECK(res.final_spacing >= 1e-6 / 1e-4 * (1.0 - 1e-6));
    CHECK(res.min_spacing_margin >= -1e-6);
}

TEST_CASE("check_contraction: identical data gives zero") {
    PiecewiseConstantDensity d({0.0, 1.0}, {1.0});
    auto vel = VelocityModel::linear(1.0, 1.0);
    auto pot = Potential::constant(1.0, CaseLabel::P1);
    CHECK(check_contraction(d, d, vel, pot, 256, 0.2, 3) == 0.0);
}
