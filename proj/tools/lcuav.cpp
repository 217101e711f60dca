// lcuav: plan laser-charged UAV missions, reproduce the reference results,
// and run parameter sweeps.
//
// Exit codes: 0 ok, 2 usage, 3 config parse error, 4 config validation error,
// 5 no feasible plan, 6 output error, 1 anything else.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lcuav/cli/commands.hpp"
#include "lcuav/cli/config.hpp"

#ifndef LCUAV_DATA_DIR
#define LCUAV_DATA_DIR "data"
#endif

namespace {

enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kParse = 3,
  kValidation = 4,
  kInfeasible = 5,
  kOutput = 6,
};

struct Options {
  std::string config;
  std::string perspective;
  std::string out;
  int workers = 0;
  std::string reference = std::string(LCUAV_DATA_DIR) + "/reference_results.json";
};

lcuav::cli::RunConfig resolve(const Options& opt) {
  using namespace lcuav::cli;
  RunConfig cfg;
  if (!opt.config.empty()) {
    cfg = load_config(opt.config);
  } else {
    validate(cfg);
  }
  if (!opt.perspective.empty()) {
    const auto p = lcuav::parse_perspective(opt.perspective);
    if (!p) throw ParseError("expected battery, energy or adjusted", std::nullopt, "--perspective");
    cfg.perspective = *p;
  }
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  if (opt.workers > 0) cfg.workers = opt.workers;
  return cfg;
}

void emit(const lcuav::cli::Report& rep, const lcuav::cli::RunConfig& cfg) {
  using namespace lcuav::cli;
  for (const auto& nt : rep.tables) {
    std::cout << "== " << nt.name << '\n';
    print_table(std::cout, nt.table);
    std::cout << '\n';
  }
  for (const auto& line : rep.notes) std::cout << line << '\n';
  if (cfg.format == OutputFormat::csv) {
    for (const auto& f : write_report(rep, cfg.output_dir)) std::cout << "wrote " << f.string() << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Laser-charged quadrotor mission planner"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config, "JSON configuration file (defaults when omitted)");
  app.add_option("--perspective", opt.perspective, "SOC perspective: battery, energy or adjusted")
      ->check(CLI::IsMember({"battery", "energy", "adjusted"}));
  app.add_option("--out", opt.out, "Output directory for CSV files");
  app.add_option("--workers", opt.workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* plan = app.add_subcommand("plan", "Optimal plan plus direct, traj1 and traj2 benchmarks");
  auto* table2 = app.add_subcommand("reproduce-table2", "Direct-path optimum against the published reference rows");
  table2->add_option("--reference", opt.reference, "Reference results file")->check(CLI::ExistingFile);
  auto* sweep = app.add_subcommand("sweep", "Evaluate the sweep block of the configuration");
  // Global flags are accepted after the subcommand name too.
  for (auto* sub : {plan, table2, sweep}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const auto cfg = resolve(opt);
    lcuav::cli::Report rep;
    if (*plan) {
      rep = lcuav::cli::cmd_plan(cfg);
    } else if (*table2) {
      rep = lcuav::cli::cmd_reproduce_table2(cfg, opt.reference);
    } else {
      rep = lcuav::cli::cmd_sweep(cfg);
    }
    emit(rep, cfg);
    return kOk;
  } catch (const lcuav::cli::ParseError& e) {
    std::cerr << "lcuav: " << e.what() << '\n';
    return kParse;
  } catch (const lcuav::cli::ValidationError& e) {
    std::cerr << "lcuav: " << e.what() << '\n';
    return kValidation;
  } catch (const lcuav::NoFeasiblePlan& e) {
    std::cerr << "lcuav: infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const lcuav::NoFeasibleDelta& e) {
    std::cerr << "lcuav: infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const lcuav::NoFeasibleHoverPoint& e) {
    std::cerr << "lcuav: infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const lcuav::HoverInfeasible& e) {
    std::cerr << "lcuav: infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const lcuav::cli::OutputError& e) {
    std::cerr << "lcuav: " << e.what() << '\n';
    return kOutput;
  } catch (const std::exception& e) {
    std::cerr << "lcuav: " << e.what() << '\n';
    return kInternal;
  }
}
