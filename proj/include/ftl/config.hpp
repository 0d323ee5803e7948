#ifndef FTL_CONFIG_HPP
#define FTL_CONFIG_HPP

#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ftl/errors.hpp"
#include "ftl/harness.hpp"
#include "ftl/model.hpp"

namespace ftl {

using json = nlohmann::json;

inline VelocityModel velocity_from_json(const json& j) {
    std::string form = j.at("form").get<std::string>();
    const json& p = j.value("params", json::object());
    if (form == "linear")
        return VelocityModel::linear(p.at("v_max").get<double>(), p.at("rho_ref").get<double>());
    if (form == "cutoff_linear")
        return VelocityModel::cutoff_linear(p.at("v_max").get<double>(), p.at("r_max").get<double>());
    if (form == "reciprocal") {
        double v_max = p.at("v_max").get<double>();
        if (p.contains("r_max")) return VelocityModel::reciprocal_cutoff(v_max, p.at("r_max").get<double>());
        return VelocityModel::reciprocal(v_max);
    }
    if (form == "table") {
        std::optional<double> r_max;
        if (p.contains("r_max")) r_max = p.at("r_max").get<double>();
        return VelocityModel::table(p.at("rho").get<std::vector<double>>(),
                                    p.at("v").get<std::vector<double>>(),
                                    p.at("lip_v").get<double>(), r_max);
    }
    throw invalid_input("config: unknown velocity form '" + form + "'");
}

inline Potential potential_from_json(const json& j) {
    std::string form = j.at("form").get<std::string>();
    CaseLabel cs = case_from_string(j.at("case").get<std::string>());
    const json& p = j.value("params", json::object());
    std::pair<double, double> window{-10.0, 10.0};
    if (j.contains("window")) {
        auto w = j.at("window").get<std::vector<double>>();
        if (w.size() != 2) throw invalid_input("config: potential window must have two entries");
        window = {w[0], w[1]};
    }
    if (form == "constant") return Potential::constant(p.at("a").get<double>(), cs, window);
    if (form == "sinusoid")
        return Potential::sinusoid(p.at("a").get<double>(), p.at("b").get<double>(),
                                   p.at("c").get<double>(), cs, window);
    if (form == "rational_odd") return Potential::rational_odd(p.at("b").get<double>(), cs, window);
    if (form == "power_abs")
        return Potential::power_abs(p.at("sign").get<double>(), p.at("alpha").get<double>(), cs, window);
    if (form == "table")
        return Potential::table(p.at("x").get<std::vector<double>>(),
                                p.at("phi").get<std::vector<double>>(), p.at("sup_phi").get<double>(),
                                p.at("sup_dphi").get<double>(), p.at("sup_ddphi").get<double>(), cs);
    throw invalid_input("config: unknown potential form '" + form + "'");
}

inline PiecewiseConstantDensity density_from_json(const json& j) {
    return PiecewiseConstantDensity(j.at("breakpoints").get<std::vector<double>>(),
                                    j.at("values").get<std::vector<double>>());
}

/// Optional direct particle setup (demonstrators): positions + ell.
struct DirectParticles {
    std::vector<double> positions;
    double ell;
};

struct ParsedConfig {
    ExperimentConfig experiment;
    std::optional<DirectParticles> particles;
};

inline ParsedConfig parse_config(const json& j) {
    ParsedConfig out;
    ExperimentConfig& cfg = out.experiment;
    cfg.velocity = velocity_from_json(j.at("velocity"));
    cfg.potential = potential_from_json(j.at("potential"));
    if (j.contains("initial")) cfg.initial = density_from_json(j.at("initial"));
    if (j.contains("particles")) {
        DirectParticles dp;
        dp.positions = j.at("particles").at("positions").get<std::vector<double>>();
        dp.ell = j.at("particles").at("ell").get<double>();
        out.particles = std::move(dp);
    }
    if (j.contains("harness")) {
        const json& h = j.at("harness");
        if (h.contains("n_values")) cfg.n_values = h.at("n_values").get<std::vector<int>>();
        cfg.grid_m = h.value("grid_m", cfg.grid_m);
        cfg.t_final = h.value("t_final", cfg.t_final);
        cfg.num_output_times = h.value("output_times", cfg.num_output_times);
        cfg.dt_max_rel = h.value("dt_max_rel", cfg.dt_max_rel);
        cfg.safety = h.value("safety", cfg.safety);
        cfg.dt_floor_rel = h.value("dt_floor_rel", cfg.dt_floor_rel);
        cfg.seed = h.value("seed", cfg.seed);
        cfg.threads = h.value("threads", cfg.threads);
        if (h.contains("tolerances")) {
            const json& t = h.at("tolerances");
            cfg.tol.spacing_margin = t.value("spacing_margin", cfg.tol.spacing_margin);
            cfg.tol.w1_slack = t.value("w1_slack", cfg.tol.w1_slack);
            cfg.tol.tv_spread = t.value("tv_spread", cfg.tol.tv_spread);
            cfg.tol.sign_tol = t.value("sign_tol", cfg.tol.sign_tol);
            cfg.tol.pinned_tol = t.value("pinned_tol", cfg.tol.pinned_tol);
            cfg.tol.contraction_slack = t.value("contraction_slack", cfg.tol.contraction_slack);
            cfg.tol.mass_tol = t.value("mass_tol", cfg.tol.mass_tol);
        }
    }
    return out;
}

inline ParsedConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw invalid_input("config: parse failure in '" + path + "': " + e.what());
    }
    try {
        return parse_config(j);
    } catch (const json::exception& e) {
        throw invalid_input("config: bad schema in '" + path + "': " + e.what());
    }
}

} // namespace ftl

#endif
