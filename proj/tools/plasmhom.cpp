// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: cell solves, effective-tensor assembly,
// convergence sweeps, ENZ tuning and admissibility checks, driven by a
// JSON config. Exit codes: 0 success, 2 config error, 3 solver error,
// 4 ENZ precondition violated.

#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "plasmhom/cellsolver.hpp"
#include "plasmhom/config.hpp"
#include "plasmhom/effective.hpp"
#include "plasmhom/finescale.hpp"
#include "plasmhom/io.hpp"

namespace {

constexpr const char* kVersion = "plasmhom 1.0.0";

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  double tol = 0.0;
};

plasmhom::RunConfig load(const CliOptions& opt) {
  plasmhom::RunConfig cfg = plasmhom::load_config(opt.config_path);
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (opt.tol > 0.0) cfg.tol = opt.tol;
  std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

std::vector<std::string> stamp(const plasmhom::RunConfig& cfg) {
  return {std::string("tool ") + kVersion,
          "config_hash " + plasmhom::content_hash(cfg.canonical)};
}

// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<int>(std::min<long>(threads, n));
  if (threads <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<long> next{0};
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (long i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string out_path(const plasmhom::RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

std::vector<double> omega_list(const plasmhom::RunConfig& cfg) {
  return cfg.omega_sweep.empty() ? std::vector<double>{cfg.omega} : cfg.omega_sweep;
}

struct SolveOutput {
  plasmhom::CellSystem sys;
  plasmhom::CellSolution sol;
};

SolveOutput run_cell_solve(const plasmhom::RunConfig& cfg, double omega) {
  SolveOutput out;
  plasmhom::MaterialModel m = plasmhom::make_material(cfg, omega);
  plasmhom::PeriodicMesh mesh = plasmhom::build_mesh(plasmhom::make_geometry(cfg));
  out.sys = plasmhom::assemble_cell_system(mesh, m, plasmhom::Vector3d::Zero(),
                                           cfg.eta_shift);
  out.sol = plasmhom::solve_correctors(out.sys, cfg.tol, cfg.max_iterations);
  return out;
}

int cmd_cell(const CliOptions& opt) {
  plasmhom::RunConfig cfg = load(opt);
  plasmhom::CsvTable table;
  table.comments = stamp(cfg);
  table.header =
      "omega,direction,h_norm,solver_residual,mean_re,mean_im,"
      "coercivity_estimate,verify_residual";
  for (double omega : omega_list(cfg)) {
    SolveOutput run = run_cell_solve(cfg, omega);
    double verify = plasmhom::corrector_residual(run.sol, run.sys,
                                                 cfg.residual_trials);
    for (int j = 0; j < 3; ++j) {
      table.rows.push_back(
          plasmhom::format_full(omega) + "," + std::to_string(j + 1) + "," +
          plasmhom::format_full(plasmhom::h_norm(run.sys, run.sol.chi[j])) + "," +
          plasmhom::format_full(run.sol.solver_residuals[j]) + "," +
          plasmhom::format_full(run.sol.mean_values[j]) + "," +
          plasmhom::format_full(run.sys.coercivity_estimate) + "," +
          plasmhom::format_full(verify));
    }
    if (cfg.dump_system)
      plasmhom::dump_sparse_system(run.sys, out_path(cfg, "system.csv"));
    if (cfg.dump_nodal) {
      plasmhom::CsvTable dump;
      dump.comments = stamp(cfg);
      dump.header = "node,chi1_re,chi1_im,chi2_re,chi2_im,chi3_re,chi3_im";
      for (long i = 0; i < run.sys.n; ++i)
        dump.rows.push_back(std::to_string(i) + "," +
                            plasmhom::format_full(run.sol.chi[0][i]) + "," +
                            plasmhom::format_full(run.sol.chi[1][i]) + "," +
                            plasmhom::format_full(run.sol.chi[2][i]));
      dump.write(out_path(cfg, "correctors.csv"));
    }
  }
  table.write(out_path(cfg, "cell.csv"));
  return 0;
}

int cmd_eff(const CliOptions& opt) {
  plasmhom::RunConfig cfg = load(opt);
  std::vector<double> omegas = omega_list(cfg);
  std::vector<plasmhom::EffectiveTensor> results(omegas.size());
  std::vector<plasmhom::Matrix3c> energy(omegas.size());
  parallel_for(static_cast<long>(omegas.size()), opt.threads, [&](long i) {
    SolveOutput run = run_cell_solve(cfg, omegas[i]);
    results[i] = plasmhom::compute_effective(run.sys, run.sol);
    energy[i] = plasmhom::effective_tensor_energy(run.sys, run.sol);
  });
  plasmhom::CsvTable table;
  table.comments = stamp(cfg);
  std::string head = "omega";
  for (const char* tag : {"direct", "energy"})
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j) {
        std::string base = std::string(tag) + "_" + std::to_string(i) +
                           std::to_string(j);
        head += "," + base + "_re," + base + "_im";
      }
  table.header = head + ",formula_gap,coercivity_margin";
  for (size_t i = 0; i < omegas.size(); ++i) {
    std::string row = plasmhom::format_full(omegas[i]);
    for (const plasmhom::Matrix3c* m : {&results[i].eps_eff, &energy[i]})
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) row += "," + plasmhom::format_full((*m)(a, b));
    row += "," + plasmhom::format_full(results[i].formula_gap);
    row += "," + plasmhom::format_full(results[i].coercivity);
    table.rows.push_back(row);
  }
  table.write(out_path(cfg, "eff.csv"));
  return 0;
}

int cmd_converge(const CliOptions& opt) {
  plasmhom::RunConfig cfg = load(opt);
  if (cfg.d_sweep.empty())
    throw plasmhom::ConfigError("sweep.d must be nonempty for converge");
  SolveOutput run = run_cell_solve(cfg, cfg.omega);
  plasmhom::Matrix3c eff = plasmhom::effective_tensor(run.sys, run.sol);
  int tangential = run.sys.mesh.tangential_axes[0];
  plasmhom::MaterialModel m = plasmhom::make_material(cfg, cfg.omega);
  auto rows = plasmhom::convergence_study(m, cfg.half_length, cfg.d_sweep,
                                          cfg.window, eff(tangential, tangential),
                                          cfg.sub_layers, cfg.samples);
  plasmhom::CsvTable table;
  table.comments = stamp(cfg);
  table.header = "d,error_E,error_H,bound_monitor,t_re,t_im";
  for (const auto& r : rows)
    table.rows.push_back(plasmhom::format_full(r.d) + "," +
                         plasmhom::format_full(r.error_e) + "," +
                         plasmhom::format_full(r.error_h) + "," +
                         plasmhom::format_full(r.bound_monitor) + "," +
                         plasmhom::format_full(r.t));
  table.write(out_path(cfg, "converge.csv"));
  return 0;
}

int cmd_enz(const CliOptions& opt) {
  plasmhom::RunConfig cfg = load(opt);
  plasmhom::EnzSpacing spacing =
      plasmhom::enz_spacing(cfg.sigma_sheet, cfg.omega, cfg.eps_host, cfg.f_mean);

  plasmhom::CsvTable summary;
  summary.comments = stamp(cfg);
  summary.header = "d0,imag_residue";
  summary.rows.push_back(plasmhom::format_full(spacing.d0) + "," +
                         plasmhom::format_full(spacing.imag_residue));
  summary.write(out_path(cfg, "enz.csv"));

  // Phase sweep on the propagating branch d >= d0: below the critical
  // spacing the effective permittivity turns negative and transmission
  // is evanescent, so phase delay is not meaningful there.
  plasmhom::Complex host(cfg.eps_host.real(), cfg.eps_host.imag() + cfg.enz_loss);
  double lambda = std::sqrt(std::max(0.0, host.real()) / cfg.mu);
  std::vector<plasmhom::FieldSolution> sols(cfg.enz_factors.size());
  std::vector<double> ds(cfg.enz_factors.size());
  parallel_for(static_cast<long>(cfg.enz_factors.size()), opt.threads, [&](long i) {
    double d = cfg.enz_factors[i] * spacing.d0;
    ds[i] = d;
    plasmhom::StackProblem s;
    s.half_length = cfg.half_length;
    s.spacing = d;
    s.omega = cfg.omega;
    s.mu = cfg.mu;
    long k_lo = static_cast<long>(std::floor(-cfg.half_length / d)) + 1;
    long k_hi =
        static_cast<long>(std::ceil((cfg.half_length - d) / d)) - 1;
    s.boundaries.push_back(-cfg.half_length);
    for (long k = k_lo; k <= k_hi; ++k) {
      s.sheet_positions.push_back(k * d);
      s.sheet_sigma.push_back(cfg.sigma_sheet);
      s.boundaries.push_back(k * d);
    }
    s.boundaries.push_back(cfg.half_length);
    s.layer_eps.assign(s.boundaries.size() - 1, host);
    s.lambda_left = s.lambda_right = lambda;
    sols[i] = plasmhom::transfer_matrix_solve(s, 64);
  });
  plasmhom::CsvTable sweep;
  sweep.comments = stamp(cfg);
  sweep.header = "d,abs_arg_t,abs_t,t_re,t_im";
  for (size_t i = 0; i < ds.size(); ++i)
    sweep.rows.push_back(plasmhom::format_full(ds[i]) + "," +
                         plasmhom::format_full(std::abs(std::arg(sols[i].t))) + "," +
                         plasmhom::format_full(std::abs(sols[i].t)) + "," +
                         plasmhom::format_full(sols[i].t));
  sweep.write(out_path(cfg, "enz_sweep.csv"));
  return 0;
}

int cmd_check(const CliOptions& opt) {
  plasmhom::RunConfig cfg = load(opt);
  plasmhom::MaterialModel m = plasmhom::make_material(cfg, cfg.omega);
  plasmhom::AdmissibilityReport rep =
      plasmhom::check_admissibility(m, cfg.check_samples);
  plasmhom::CsvTable table;
  table.comments = stamp(cfg);
  table.header = "min_im_eps,max_abs_eps,min_re_sigma,max_abs_sigma,pass,samples";
  table.rows.push_back(plasmhom::format_full(rep.min_im_eps) + "," +
                       plasmhom::format_full(rep.max_abs_eps) + "," +
                       plasmhom::format_full(rep.min_re_sigma) + "," +
                       plasmhom::format_full(rep.max_abs_sigma) + "," +
                       (rep.pass ? "1" : "0") + "," +
                       std::to_string(rep.sample_count));
  table.write(out_path(cfg, "check.csv"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered plasmonic homogenization toolkit"};
  app.require_subcommand(1);
  CliOptions opt;
  std::string command;
  for (const char* name : {"cell", "eff", "converge", "enz", "check"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "config file path")->required();
    sub->add_option("--out", opt.out_dir, "output directory override");
    sub->add_option("--threads", opt.threads, "worker pool size");
    sub->add_option("--tol", opt.tol, "solver tolerance override");
    sub->callback([&command, name] { command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    if (command == "cell") return cmd_cell(opt);
    if (command == "eff") return cmd_eff(opt);
    if (command == "converge") return cmd_converge(opt);
    if (command == "enz") {
      try {
        return cmd_enz(opt);
      } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
      }
    }
    if (command == "check") return cmd_check(opt);
  } catch (const plasmhom::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
