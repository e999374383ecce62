#include "shls/suites.hpp"

#include "CLI11.hpp"

#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using shls::suites::RunConfig;

int print_checks(std::ostream& out) {
  for (const auto& c : shls::suites::catalog()) out << "  " << c.name << " [" << c.suite << "]\n";
  return 1;
}

int describe(const std::string& name) {
  const auto* info = shls::suites::find_check(name);
  if (!info) {
    std::cerr << "unknown check '" << name << "'; available checks:\n";
    return print_checks(std::cerr);
  }
  std::cout << info->name << " (" << info->suite << ")\n"
            << "  anchor:    " << info->anchor << "\n"
            << "  formula:   " << info->formula << "\n"
            << "  oracle:    " << info->oracle << "\n"
            << "  tolerance: " << info->tolerance << "\n";
  return 0;
}

void cap_threads() {
  if (const char* env = std::getenv("SEMIGROUP_HLS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
}

void save(const shls::RunReport& report, const std::string& out) {
  report.write_json(out + "/report.json");
  report.write_summary_csv(out + "/summary.csv");
}

int run_checks(const RunConfig& cfg) {
  shls::RunReport report;
  report.config = cfg.to_json();
  std::filesystem::create_directories(cfg.out);
  const auto selected = cfg.suite == "all" ? shls::suites::suite_names() : std::vector<std::string>{cfg.suite};
  for (const auto& name : selected) {
    std::cerr << "suite " << name << " ..." << std::endl;
    try {
      shls::suites::run_suite(name, cfg, report);
    } catch (const std::exception& e) {
      report.errors.push_back(name + ": " + e.what());
      std::cerr << "suite " << name << " failed: " << e.what() << std::endl;
    }
    save(report, cfg.out);
  }
  for (const auto& c : report.checks)
    std::cout << shls::to_string(c.status) << "  " << c.name << "  value=" << c.value << " oracle=" << c.oracle << "\n";
  std::cout << report.checks.size() << " checks: " << report.count(shls::Status::pass) << " pass, "
            << report.count(shls::Status::fail) << " fail, " << report.count(shls::Status::inconclusive)
            << " inconclusive, " << report.count(shls::Status::skipped) << " skipped\n";
  return report.exit_code(cfg.strict);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semigroup square functions and HLS check runner"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run check suites and write report.json and summary.csv");
  run_cmd->add_option("--config", config_path, "JSON config; flags override its fields")->check(CLI::ExistingFile);
  auto* o_suite = run_cmd->add_option("--suite", flags.suite, "spectral|subordination|continuum|functionals|mc|all");
  auto* o_chain = run_cmd->add_option("--chain", flags.chain, "builtin:<name> or chain JSON path");
  auto* o_grid_n = run_cmd->add_option("--grid-n", flags.grid_n, "grid nodes per axis");
  auto* o_extent = run_cmd->add_option("--grid-extent", flags.grid_extent, "grid half-width");
  auto* o_alpha = run_cmd->add_option("--alpha", flags.alphas, "alpha list")->delimiter(',');
  auto* o_p = run_cmd->add_option("--p", flags.ps, "p list")->delimiter(',');
  auto* o_paths = run_cmd->add_option("--paths", flags.paths, "Monte Carlo paths");
  auto* o_dt = run_cmd->add_option("--dt", flags.dt, "base time step");
  auto* o_s = run_cmd->add_option("--s", flags.s_values, "starting heights")->delimiter(',');
  auto* o_trunc = run_cmd->add_option("--truncation", flags.truncation, "N in (y^alpha ^ N)");
  auto* o_seed = run_cmd->add_option("--seed", flags.seed, "RNG seed");
  auto* o_out = run_cmd->add_option("--out", flags.out, "output directory");
  auto* o_strict = run_cmd->add_flag("--strict", flags.strict, "inconclusive counts as failure");
  auto* o_paths_csv = run_cmd->add_flag("--paths-csv", flags.write_paths, "also write paths.csv");

  std::string check_name;
  auto* describe_cmd = app.add_subcommand("describe", "Print a check's anchor, formula, oracle and tolerance");
  describe_cmd->add_option("check", check_name)->required();

  CLI11_PARSE(app, argc, argv);

  if (describe_cmd->parsed()) return describe(check_name);

  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      cfg.merge_json(nlohmann::json::parse(in));
    }
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  if (o_suite->count()) cfg.suite = flags.suite;
  if (o_chain->count()) cfg.chain = flags.chain;
  if (o_grid_n->count()) cfg.grid_n = flags.grid_n;
  if (o_extent->count()) cfg.grid_extent = flags.grid_extent;
  if (o_alpha->count()) cfg.alphas = flags.alphas;
  if (o_p->count()) cfg.ps = flags.ps;
  if (o_paths->count()) cfg.paths = flags.paths;
  if (o_dt->count()) cfg.dt = flags.dt;
  if (o_s->count()) cfg.s_values = flags.s_values;
  if (o_trunc->count()) cfg.truncation = flags.truncation;
  if (o_seed->count()) cfg.seed = flags.seed;
  if (o_out->count()) cfg.out = flags.out;
  if (o_strict->count()) cfg.strict = flags.strict;
  if (o_paths_csv->count()) cfg.write_paths = flags.write_paths;

  try {
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  cap_threads();
  return run_checks(cfg);
}
