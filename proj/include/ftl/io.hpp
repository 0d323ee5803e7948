#ifndef FTL_IO_HPP
#define FTL_IO_HPP

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftl/errors.hpp"
#include "ftl/harness.hpp"
#include "ftl/scheme.hpp"

namespace ftl {

/// 17 significant digits: doubles round-trip exactly, so outputs are stable
/// golden files.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input("io: cannot open '" + path + "' for writing");
    out << content;
}

/// Long-format trajectory CSV: one row per (snapshot, particle).
inline std::string trajectory_csv(const Trajectory& traj) {
    std::string s = "t,i,x_i\n";
    for (const auto& snap : traj.snapshots)
        for (std::size_t i = 0; i < snap.positions.size(); ++i) {
            s += fmt17(snap.t);
            s += ',';
            s += std::to_string(i);
            s += ',';
            s += fmt17(snap.positions[i]);
            s += '\n';
        }
    return s;
}

/// Same schema with cells in place of particles.
inline std::string fv_csv(const FvSolution& sol) {
    std::string s = "t,i,rho_i\n";
    for (std::size_t k = 0; k < sol.times.size(); ++k)
        for (int j = 0; j < sol.grid.m; ++j) {
            s += fmt17(sol.times[k]);
            s += ',';
            s += std::to_string(j);
            s += ',';
            s += fmt17(sol.states[k][j]);
            s += '\n';
        }
    return s;
}

/// Reconstructed density at one snapshot: interval edges and value.
inline std::string density_csv(const PiecewiseConstantDensity& d) {
    std::string s = "i,x_lo,x_hi,rho\n";
    for (std::size_t j = 0; j < d.values.size(); ++j) {
        s += std::to_string(j);
        s += ',';
        s += fmt17(d.breakpoints[j]);
        s += ',';
        s += fmt17(d.breakpoints[j + 1]);
        s += ',';
        s += fmt17(d.values[j]);
        s += '\n';
    }
    return s;
}

/// Per-snapshot diagnostics sidecar.
inline nlohmann::json trajectory_diagnostics_json(const Trajectory& traj) {
    nlohmann::json j;
    j["case"] = to_string(traj.declared_case);
    j["scheme_case"] = to_string(traj.scheme_case);
    j["ell"] = traj.ell;
    if (traj.k) j["k_n"] = *traj.k;
    if (traj.pinned) j["pinned"] = *traj.pinned;
    j["snapshots"] = nlohmann::json::array();
    for (const auto& s : traj.snapshots) {
        nlohmann::json row;
        row["t"] = s.t;
        row["min_spacing"] = s.diag.min_spacing;
        row["max_density"] = s.diag.max_density;
        row["tv"] = s.diag.tv;
        row["mass"] = s.diag.mass;
        if (std::isfinite(s.diag.spacing_bound)) {
            row["bound"] = s.diag.spacing_bound;
            row["margin"] = s.diag.spacing_margin;
        }
        j["snapshots"].push_back(row);
    }
    return j;
}

inline std::string report_csv(const ConvergenceReport& rep) {
    std::string s = "n,l1_spacetime_error,max_tv,tv0,min_spacing_margin,w1_worst_ratio,mass_drift\n";
    for (const auto& r : rep.rows) {
        s += std::to_string(r.n);
        s += ',';
        s += fmt17(r.l1_spacetime_error);
        s += ',';
        s += fmt17(r.max_tv);
        s += ',';
        s += fmt17(r.tv0);
        s += ',';
        s += fmt17(r.min_spacing_margin);
        s += ',';
        s += fmt17(r.w1_worst_ratio);
        s += ',';
        s += fmt17(r.mass_drift);
        s += '\n';
    }
    return s;
}

inline nlohmann::json report_json(const ConvergenceReport& rep) {
    nlohmann::json j;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rep.rows) {
        nlohmann::json row;
        row["n"] = r.n;
        row["l1_spacetime_error"] = r.l1_spacetime_error;
        row["max_tv"] = r.max_tv;
        row["tv0"] = r.tv0;
        row["min_spacing_margin"] = r.min_spacing_margin;
        row["w1_worst_ratio"] = r.w1_worst_ratio;
        row["mass_drift"] = r.mass_drift;
        j["rows"].push_back(row);
    }
    j["error_decreasing"] = rep.error_decreasing;
    j["tv_spread_ratio"] = rep.tv_spread_ratio;
    j["worst_tv0"] = rep.worst_tv0;
    return j;
}

} // namespace ftl

#endif
