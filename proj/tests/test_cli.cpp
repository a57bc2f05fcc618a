// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using Catch::Approx;
namespace fs = std::filesystem;

namespace {

std::string cli_binary() {
  const char* p = std::getenv("PLASMHOM_CLI");
  REQUIRE(p != nullptr);
  return p;
}

fs::path fresh_dir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() /
               ("plasmhom_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

int run_cli(const std::string& args) {
  std::string cmd = cli_binary() + " " + args + " 2>/dev/null";
  int rc = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kConstantConfig = R"({
  "material": {"profile": "constant", "eps": [2.0, 0.1], "sigma": [0.01, 0.3]},
  "geometry": {"resolution": 8, "sheet": "flat", "normal_axis": 3}
})";

}  // namespace

TEST_CASE("cell on the constant profile reports vanishing correctors") {
  fs::path dir = fresh_dir("cell_const");
  write_file(dir / "cfg.json", kConstantConfig);
  int rc = run_cli("cell --config " + (dir / "cfg.json").string() + " --out " +
                   dir.string());
  REQUIRE(rc == 0);
  auto lines = read_lines(dir / "cell.csv");
  REQUIRE(lines.size() == 6);  // 2 comments, header, 3 direction rows
  CHECK(lines[0].rfind("# tool plasmhom", 0) == 0);
  CHECK(lines[1].rfind("# config_hash ", 0) == 0);
  CHECK(lines[2].rfind("omega,direction,h_norm", 0) == 0);
  for (int j = 0; j < 3; ++j) {
    auto f = split_csv(lines[3 + j]);
    REQUIRE(f.size() == 8);
    CHECK(std::stod(f[1]) == j + 1);
    CHECK(std::stod(f[2]) < 1e-9);   // h_norm
    CHECK(std::stod(f[7]) < 1e-9);   // verify_residual
    CHECK(std::stod(f[6]) > 0.0);    // coercivity estimate
  }
}

TEST_CASE("eff reproduces the constant-coefficient closed form") {
  fs::path dir = fresh_dir("eff_const");
  write_file(dir / "cfg.json", kConstantConfig);
  int rc = run_cli("eff --config " + (dir / "cfg.json").string() + " --out " +
                   dir.string());
  REQUIRE(rc == 0);
  auto lines = read_lines(dir / "eff.csv");
  REQUIRE(lines.size() == 4);
  auto f = split_csv(lines[3]);
  REQUIRE(f.size() == 1 + 36 + 2);
  auto direct = [&](int i, int j) {
    int base = 1 + 2 * ((i - 1) * 3 + (j - 1));
    return std::complex<double>(std::stod(f[base]), std::stod(f[base + 1]));
  };
  // eps I + (i sigma / omega) P_T with normal axis 3.
  CHECK(std::abs(direct(1, 1) - std::complex<double>(1.7, 0.11)) < 1e-9);
  CHECK(std::abs(direct(2, 2) - std::complex<double>(1.7, 0.11)) < 1e-9);
  CHECK(std::abs(direct(3, 3) - std::complex<double>(2.0, 0.1)) < 1e-9);
  CHECK(std::abs(direct(1, 2)) < 1e-9);
  CHECK(std::stod(f[37]) < 1e-9);  // formula gap
  CHECK(std::stod(f[38]) > 0.0);   // coercivity margin
}

TEST_CASE("malformed configs exit with code 2") {
  fs::path dir = fresh_dir("badcfg");
  write_file(dir / "unknown.json", R"({"material": {"epsilonn": 2.0}})");
  CHECK(run_cli("eff --config " + (dir / "unknown.json").string()) == 2);
  write_file(dir / "badtype.json", R"({"geometry": {"resolution": "eight"}})");
  CHECK(run_cli("cell --config " + (dir / "badtype.json").string()) == 2);
  write_file(dir / "notjson.json", "not json at all {");
  CHECK(run_cli("cell --config " + (dir / "notjson.json").string()) == 2);
  CHECK(run_cli("cell --config " + (dir / "missing.json").string()) == 2);
  CHECK(run_cli("cell") == 2);  // missing required --config
  write_file(dir / "ok.json", kConstantConfig);
  CHECK(run_cli("converge --config " + (dir / "ok.json").string() + " --out " +
                dir.string()) == 2);  // converge needs sweep.d
}

TEST_CASE("unrecoverable solver failure exits with code 3") {
  fs::path dir = fresh_dir("solvefail");
  write_file(dir / "cfg.json", R"({
    "material": {"profile": "two_phase"},
    "geometry": {"resolution": 18},
    "solver": {"max_iterations": 1}
  })");
  CHECK(run_cli("cell --config " + (dir / "cfg.json").string() + " --out " +
                dir.string()) == 3);
}

TEST_CASE("enz reports the critical spacing and phase minimum") {
  fs::path dir = fresh_dir("enz");
  write_file(dir / "cfg.json", R"({
    "enz": {"sigma_sheet": [0.0, 0.3], "eps_host": 2.0, "f_mean": 1.0}
  })");
  int rc = run_cli("enz --config " + (dir / "cfg.json").string() + " --out " +
                   dir.string());
  REQUIRE(rc == 0);
  auto summary = read_lines(dir / "enz.csv");
  REQUIRE(summary.size() == 4);
  auto f = split_csv(summary[3]);
  CHECK(std::stod(f[0]) == Approx(0.15).epsilon(1e-12));
  CHECK(std::stod(f[1]) < 1e-12);
  auto sweep = read_lines(dir / "enz_sweep.csv");
  REQUIRE(sweep.size() == 3 + 6);
  double best = 1e9;
  size_t best_row = 0;
  for (size_t i = 3; i < sweep.size(); ++i) {
    auto r = split_csv(sweep[i]);
    REQUIRE(r.size() == 5);
    double a = std::stod(r[1]);
    if (a < best) {
      best = a;
      best_row = i;
    }
  }
  CHECK(best_row == 3);  // minimum phase delay at d0 itself
  CHECK(std::stod(split_csv(sweep[3])[0]) == Approx(0.15).epsilon(1e-12));
}

TEST_CASE("enz precondition violations exit with code 4") {
  fs::path dir = fresh_dir("enz_bad");
  write_file(dir / "cfg.json", R"({
    "enz": {"sigma_sheet": [0.3, -0.1], "eps_host": 2.0}
  })");
  CHECK(run_cli("enz --config " + (dir / "cfg.json").string() + " --out " +
                dir.string()) == 4);
  write_file(dir / "cfg2.json", R"({
    "enz": {"sigma_sheet": [0.0, 0.3], "f_mean": 0.0}
  })");
  CHECK(run_cli("enz --config " + (dir / "cfg2.json").string() + " --out " +
                dir.string()) == 4);
}

TEST_CASE("check writes the admissibility report") {
  fs::path dir = fresh_dir("check");
  write_file(dir / "cfg.json", kConstantConfig);
  int rc = run_cli("check --config " + (dir / "cfg.json").string() + " --out " +
                   dir.string());
  REQUIRE(rc == 0);
  auto lines = read_lines(dir / "check.csv");
  REQUIRE(lines.size() == 4);
  auto f = split_csv(lines[3]);
  REQUIRE(f.size() == 6);
  CHECK(std::stod(f[0]) == Approx(0.1));   // min Im eps
  CHECK(std::stod(f[2]) == Approx(0.01));  // min Re sigma
  CHECK(f[4] == "1");                      // pass
}

TEST_CASE("converge runs the layered comparison") {
  fs::path dir = fresh_dir("converge");
  write_file(dir / "cfg.json", R"({
    "material": {"profile": "two_phase", "eps": [2.0, 0.05], "eps2": [4.0, 0.05],
                 "sigma": [0.01, 0.3]},
    "geometry": {"resolution": 8},
    "sweep": {"d": [0.125, 0.0625]},
    "finescale": {"half_length": 1.0, "window": 0.25, "samples": 2048}
  })");
  int rc = run_cli("converge --config " + (dir / "cfg.json").string() +
                   " --out " + dir.string());
  REQUIRE(rc == 0);
  auto lines = read_lines(dir / "converge.csv");
  REQUIRE(lines.size() == 5);
  auto coarse = split_csv(lines[3]);
  auto fine = split_csv(lines[4]);
  REQUIRE(coarse.size() == 6);
  CHECK(std::stod(coarse[0]) == Approx(0.125));
  CHECK(std::stod(fine[1]) < std::stod(coarse[1]));  // error_E shrinks
  CHECK(std::stod(coarse[1]) > 0.0);
}

TEST_CASE("identical configs give byte-identical outputs") {
  fs::path dir_a = fresh_dir("det_a");
  fs::path dir_b = fresh_dir("det_b");
  write_file(dir_a / "cfg.json", kConstantConfig);
  write_file(dir_b / "cfg.json", kConstantConfig);
  REQUIRE(run_cli("eff --config " + (dir_a / "cfg.json").string() + " --out " +
                  dir_a.string()) == 0);
  REQUIRE(run_cli("eff --config " + (dir_b / "cfg.json").string() + " --out " +
                  dir_b.string() + " --threads 2") == 0);
  CHECK(read_all(dir_a / "eff.csv") == read_all(dir_b / "eff.csv"));
  REQUIRE(run_cli("cell --config " + (dir_a / "cfg.json").string() + " --out " +
                  dir_a.string()) == 0);
  REQUIRE(run_cli("cell --config " + (dir_b / "cfg.json").string() + " --out " +
                  dir_b.string()) == 0);
  CHECK(read_all(dir_a / "cell.csv") == read_all(dir_b / "cell.csv"));
}

TEST_CASE("config hash changes when the config changes") {
  fs::path dir = fresh_dir("hash");
  write_file(dir / "a.json", kConstantConfig);
  write_file(dir / "b.json", R"({
    "material": {"profile": "constant", "eps": [2.5, 0.1], "sigma": [0.01, 0.3]},
    "geometry": {"resolution": 8, "sheet": "flat", "normal_axis": 3}
  })");
  REQUIRE(run_cli("check --config " + (dir / "a.json").string() + " --out " +
                  (dir / "a_out").string()) == 0);
  REQUIRE(run_cli("check --config " + (dir / "b.json").string() + " --out " +
                  (dir / "b_out").string()) == 0);
  auto la = read_lines(dir / "a_out" / "check.csv");
  auto lb = read_lines(dir / "b_out" / "check.csv");
  CHECK(la[1] != lb[1]);
}

TEST_CASE("cell dump options emit system and nodal tables") {
  fs::path dir = fresh_dir("dump");
  write_file(dir / "cfg.json", R"({
    "material": {"profile": "constant"},
    "geometry": {"resolution": 4},
    "solver": {"dump_system": true, "dump_nodal": true}
  })");
  REQUIRE(run_cli("cell --config " + (dir / "cfg.json").string() + " --out " +
                  dir.string()) == 0);
  CHECK(fs::exists(dir / "system.csv"));
  CHECK(fs::exists(dir / "correctors.csv"));
  auto nodal = read_lines(dir / "correctors.csv");
  REQUIRE(nodal.size() == 3 + 64);
  CHECK(split_csv(nodal[3]).size() == 7);
}
