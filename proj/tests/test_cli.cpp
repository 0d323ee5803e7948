#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ftl/cli.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"ftlsim"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return ftl::cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path write_tiny_config(const fs::path& dir) {
    fs::create_directories(dir);
    fs::path p = dir / "tiny.json";
    std::ofstream out(p);
    out << R"({
  "velocity": {"form": "linear", "params": {"v_max": 1.0, "rho_ref": 1.0}},
  "potential": {"form": "constant", "params": {"a": 1.0}, "case": "P1"},
  "initial": {"breakpoints": [0.0, 1.0], "values": [1.0]},
  "harness": {"n_values": [8, 16, 32], "grid_m": 256, "t_final": 0.25, "output_times": 5}
})";
    return p;
}

} // namespace

TEST_CASE("cli: missing config gives status 2 and names the path") {
    CHECK(run_cli({"simulate", "--config", "/nonexistent/nope.json"}) == 2);
}

TEST_CASE("cli: usage errors give status 2") {
    CHECK(run_cli({"simulate"}) == 2);              // --config required
    CHECK(run_cli({"frobnicate", "--config", "x"}) == 2);
}

TEST_CASE("cli: simulate writes a trajectory with n+1 particles per snapshot") {
    fs::path tmp = fs::temp_directory_path() / "ftl_cli_sim";
    fs::remove_all(tmp);
    fs::path cfg = write_tiny_config(tmp);
    fs::path out = tmp / "out";
    REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--out", out.string(), "--n", "12"}) == 0);

    std::ifstream traj(out / "trajectory.csv");
    REQUIRE(traj.good());
    std::string line;
    std::getline(traj, line);
    CHECK(line == "t,i,x_i");
    std::set<std::string> indices_at_first_t;
    std::string first_t;
    while (std::getline(traj, line)) {
        auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
        std::string t = line.substr(0, c1), i = line.substr(c1 + 1, c2 - c1 - 1);
        if (first_t.empty()) first_t = t;
        if (t == first_t) indices_at_first_t.insert(i);
    }
    CHECK(indices_at_first_t.size() == 13);  // n+1 particles
    CHECK(fs::exists(out / "trajectory.json"));
    CHECK(fs::exists(out / "density_000.csv"));
}

TEST_CASE("cli: identical invocations produce byte-identical outputs") {
    fs::path tmp = fs::temp_directory_path() / "ftl_cli_det";
    fs::remove_all(tmp);
    fs::path cfg = write_tiny_config(tmp);
    fs::path o1 = tmp / "a", o2 = tmp / "b";
    REQUIRE(run_cli({"study", "--config", cfg.string(), "--out", o1.string()}) == 0);
    REQUIRE(run_cli({"study", "--config", cfg.string(), "--out", o2.string()}) == 0);
    for (const char* f : {"report.csv", "report.json", "summary.txt"})
        CHECK(slurp(o1 / f) == slurp(o2 / f));
}

TEST_CASE("cli: study emits report files and exits zero on a healthy run") {
    fs::path tmp = fs::temp_directory_path() / "ftl_cli_study";
    fs::remove_all(tmp);
    fs::path cfg = write_tiny_config(tmp);
    fs::path out = tmp / "out";
    REQUIRE(run_cli({"study", "--config", cfg.string(), "--out", out.string()}) == 0);
    CHECK(fs::exists(out / "report.csv"));
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "summary.txt"));
    std::string summary = slurp(out / "summary.txt");
    CHECK(summary.find("[FAIL]") == std::string::npos);
}

TEST_CASE("cli: check subcommand runs the property suite headlessly") {
    fs::path tmp = fs::temp_directory_path() / "ftl_cli_check";
    fs::remove_all(tmp);
    fs::path cfg = write_tiny_config(tmp);
    fs::path out = tmp / "out";
    CHECK(run_cli({"check", "--config", cfg.string(), "--out", out.string()}) == 0);
    std::string summary = slurp(out / "summary.txt");
    CHECK(summary.find("[PASS]") != std::string::npos);
}

TEST_CASE("cli: reference subcommand writes the fv trajectory") {
    fs::path tmp = fs::temp_directory_path() / "ftl_cli_ref";
    fs::remove_all(tmp);
    fs::path cfg = write_tiny_config(tmp);
    fs::path out = tmp / "out";
    REQUIRE(run_cli({"reference", "--config", cfg.string(), "--out", out.string()}) == 0);
    CHECK(fs::exists(out / "reference.csv"));
    CHECK(fs::exists(out / "reference.json"));
    std::string head = slurp(out / "reference.csv").substr(0, 9);
    CHECK(head == "t,i,rho_i");
}
