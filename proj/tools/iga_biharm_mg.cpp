// Command-line driver: benchmark tables, verification suites, single solves.
//
// Exit codes: 0 success, 1 solver non-convergence, 2 invalid configuration,
// 3 verification failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "igamg/bench.hpp"
#include "igamg/solver.hpp"
#include "igamg/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoConvergence = 1;
constexpr int kExitInvalidConfig = 2;
constexpr int kExitVerifyFailure = 3;

int run_bench(const std::string& degrees_text, const std::string& levels_text,
              const std::string& smoother_text, igamg::BenchSpec spec,
              const std::string& out_path) {
  spec.degrees = igamg::parse_int_range(degrees_text);
  spec.levels = igamg::parse_int_range(levels_text);
  spec.smoother = igamg::smoother_from_string(smoother_text);
  igamg::validate_bench_spec(spec);

  const igamg::BenchTable table = igamg::run_benchmark(spec, &std::cerr);
  std::cout << igamg::format_markdown(table);
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      std::cerr << "error: cannot open output file: " << out_path << "\n";
      return kExitInvalidConfig;
    }
    f << igamg::format_csv(table);
  }
  return table.all_converged ? kExitOk : kExitNoConvergence;
}

void apply_json_config(const std::string& path, igamg::SolverConfig& cfg) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  if (!j.is_object()) throw std::invalid_argument("config root must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "geometry") cfg.geometry = value.get<std::string>();
    else if (key == "degree") cfg.degree = value.get<int>();
    else if (key == "levels") cfg.levels = value.get<int>();
    else if (key == "uniform_coarse") cfg.uniform_coarse = value.get<bool>();
    else if (key == "beta") cfg.beta = value.get<double>();
    else if (key == "smoother") cfg.smoother = igamg::smoother_from_string(value.get<std::string>());
    else if (key == "sigma0_inv") cfg.sigma0_inv = value.get<double>();
    else if (key == "sigma0") cfg.sigma0 = value.get<double>();
    else if (key == "tau") cfg.tau = value.get<double>();
    else if (key == "rtol") cfg.rtol = value.get<double>();
    else if (key == "max_iters") cfg.max_iters = value.get<int>();
    else if (key == "seed") cfg.seed = value.get<unsigned long long>();
    else if (key == "mem_cap_bytes") cfg.mem_cap_bytes = value.get<double>();
    else throw std::invalid_argument("unknown config field: " + key);
  }
}

int run_solve(const igamg::SolverConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  igamg::AssembledSystem S;
  try {
    S = igamg::build_system(cfg);
  } catch (const igamg::MemCapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidConfig;
  }
  const auto t1 = clock::now();
  Eigen::VectorXd x;
  const igamg::SolveReport rep =
      igamg::mg_pcg_solve(S.mg, S.rhs, x, cfg.rtol, cfg.max_iters, cfg.seed);
  const auto t2 = clock::now();

  igamg::ManufacturedProblem prob;
  prob.d = S.geo->dim();
  const double err = igamg::physical_l2_error(
      S.mg.lv.back().space, *S.geo, x, S.lift_full,
      [&prob](const double* y) { return prob.u(y); });

  char buf[64];
  std::cout << "geometry: " << cfg.geometry << "  degree: " << cfg.degree
            << "  levels: " << cfg.levels
            << "  coarse-grid: " << (cfg.uniform_coarse ? "uniform" : "paper")
            << "  dofs: " << S.mg.lv.back().n << "\n";
  std::snprintf(buf, sizeof(buf), "%g", cfg.beta);
  std::cout << "smoother: " << igamg::to_string(cfg.smoother) << "  beta: " << buf;
  std::snprintf(buf, sizeof(buf), "%g", cfg.sigma0_inv);
  std::cout << "  sigma0-inv: " << buf;
  std::snprintf(buf, sizeof(buf), "%g", cfg.tau);
  std::cout << "  tau: " << buf << "  seed: " << cfg.seed << "\n";
  std::snprintf(buf, sizeof(buf), "%.3e", rep.final_relative_residual);
  std::cout << "iterations: " << rep.iterations
            << "  converged: " << (rep.converged ? "yes" : "no")
            << "  final-relative-residual: " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.6e", err);
  std::cout << "l2-error-vs-manufactured: " << buf << "\n";
  std::cerr << "build: " << std::chrono::duration<double>(t1 - t0).count()
            << "s  solve: " << std::chrono::duration<double>(t2 - t1).count() << "s\n";
  return rep.converged ? kExitOk : kExitNoConvergence;
}

int run_verify(const std::string& suite) {
  std::vector<std::string> names;
  if (suite == "all")
    names = igamg::verify_suite_names();
  else
    names.push_back(suite);
  int violations = 0;
  for (const std::string& name : names) {
    const igamg::VerifyReport rep = igamg::run_verify_suite(name);  // throws on bad name
    igamg::print_report(std::cout, rep);
    violations += rep.violations();
  }
  return violations == 0 ? kExitOk : kExitVerifyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multigrid-preconditioned CG benchmark for the second biharmonic problem "
               "discretized with maximum-smoothness tensor-product B-splines"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "Run a (level x degree) iteration-count table");
  igamg::BenchSpec spec;
  std::string degrees_text = "3..9", levels_text = "5..8", smoother_text = "gs", out_path;
  bench->add_option("--geometry", spec.geometry,
                    "unit-square|unit-cube|quarter-annulus-2d|twisted-annulus-3d");
  bench->add_option("--smoother", smoother_text, "gs|scms|hybrid");
  bench->add_option("--beta", spec.beta, "zero-order coefficient");
  bench->add_option("--degrees", degrees_text, "spline degrees, e.g. 3..9 or 3,5,7");
  bench->add_option("--levels", levels_text, "refinement levels, e.g. 5..8");
  bench->add_option("--sigma0-inv", spec.sigma0_inv, "smoother rate parameter (reciprocal)");
  bench->add_option("--tau", spec.tau, "smoother damping");
  bench->add_option("--seed", spec.seed, "random initial-guess seed");
  bench->add_option("--rtol", spec.rtol, "relative residual stopping tolerance");
  bench->add_option("--max-iters", spec.max_iters, "iteration cap");
  bench->add_option("--mem-cap-bytes", spec.mem_cap_bytes, "per-cell memory estimate cap");
  bench->add_flag("--uniform-coarse", spec.uniform_coarse,
                  "start from the uniform h=1/4 coarse grid");
  bench->add_flag("--force", spec.force, "lift the desk-scale level/degree caps");
  bench->add_option("--out", out_path, "CSV output path");

  // verify
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  std::string suite;
  verify->add_option("suite", suite, "approximation|inverse|equivalence|smoother|eigen|all")
      ->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one manufactured problem instance");
  std::string config_path;
  igamg::SolverConfig scfg;
  std::string solve_smoother;
  solve->add_option("--config", config_path, "JSON configuration file");
  solve->add_option("--geometry", scfg.geometry, "geometry name");
  solve->add_option("--degree", scfg.degree, "spline degree");
  solve->add_option("--levels", scfg.levels, "refinement levels");
  solve->add_option("--beta", scfg.beta, "zero-order coefficient");
  solve->add_option("--smoother", solve_smoother, "gs|scms|hybrid");
  solve->add_option("--sigma0-inv", scfg.sigma0_inv, "smoother rate parameter (reciprocal)");
  solve->add_option("--sigma0", scfg.sigma0, "explicit smoother weight (overrides sigma0-inv)");
  solve->add_option("--tau", scfg.tau, "smoother damping");
  solve->add_option("--rtol", scfg.rtol, "relative residual stopping tolerance");
  solve->add_option("--max-iters", scfg.max_iters, "iteration cap");
  solve->add_option("--seed", scfg.seed, "random initial-guess seed");
  solve->add_flag("--uniform-coarse", scfg.uniform_coarse,
                  "start from the uniform h=1/4 coarse grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInvalidConfig;
  }

  try {
    if (bench->parsed()) return run_bench(degrees_text, levels_text, smoother_text, spec, out_path);
    if (verify->parsed()) return run_verify(suite);
    if (solve->parsed()) {
      // JSON config first, then explicit command-line flags override on top.
      if (!config_path.empty()) {
        igamg::SolverConfig from_file;
        apply_json_config(config_path, from_file);
        const auto given = [&](const char* name) { return solve->count(name) > 0; };
        if (given("--geometry")) from_file.geometry = scfg.geometry;
        if (given("--degree")) from_file.degree = scfg.degree;
        if (given("--levels")) from_file.levels = scfg.levels;
        if (given("--beta")) from_file.beta = scfg.beta;
        if (given("--sigma0-inv")) from_file.sigma0_inv = scfg.sigma0_inv;
        if (given("--sigma0")) from_file.sigma0 = scfg.sigma0;
        if (given("--tau")) from_file.tau = scfg.tau;
        if (given("--rtol")) from_file.rtol = scfg.rtol;
        if (given("--max-iters")) from_file.max_iters = scfg.max_iters;
        if (given("--seed")) from_file.seed = scfg.seed;
        if (given("--uniform-coarse")) from_file.uniform_coarse = scfg.uniform_coarse;
        if (given("--smoother"))
          from_file.smoother = igamg::smoother_from_string(solve_smoother);
        return run_solve(from_file);
      }
      if (!solve_smoother.empty()) scfg.smoother = igamg::smoother_from_string(solve_smoother);
      return run_solve(scfg);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidConfig;
  }
  return kExitInvalidConfig;
}
