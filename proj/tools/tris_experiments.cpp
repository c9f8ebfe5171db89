#include <exception>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "tris/experiments.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string seeds;
  std::string out;
  std::string sweep_axis;
  std::string multiplier_mode;
  std::string sweep_values;
  bool wall_time = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seeds", a.seeds, "seed list, e.g. 1-20 or 3,5,8");
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_option("--sweep-axis", a.sweep_axis, "none|power|elements|kappa|users");
  cmd->add_option("--multiplier-mode", a.multiplier_mode, "dual-ascent|paper");
}

tris::ExperimentConfig build_config(const CommonArgs& a) {
  tris::ExperimentConfig cfg = a.config.empty() ? tris::ExperimentConfig{}
                                                : tris::load_config(a.config);
  if (!a.seeds.empty()) cfg.seeds = tris::parse_seed_list(a.seeds);
  if (!a.out.empty()) cfg.out_dir = a.out;
  if (!a.sweep_axis.empty()) cfg.sweep_axis = tris::parse_sweep_axis(a.sweep_axis);
  if (!a.multiplier_mode.empty()) cfg.solver.mode = tris::parse_multiplier_mode(a.multiplier_mode);
  if (!a.sweep_values.empty()) {
    std::istringstream in("sweep_values = " + a.sweep_values);
    cfg.sweep_values = tris::parse_config(in, "--sweep-values").sweep_values;
  }
  if (a.wall_time) cfg.record_wall_time = true;
  cfg.validate();
  return cfg;
}

void report(const std::filesystem::path& p, const tris::ExperimentResult& r) {
  std::cout << "wrote " << p.string() << "\n";
  for (const std::string& s : r.summary) std::cout << "  " << s << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tris_experiments: consensus-ADMM max-min SINR experiments"};
  app.require_subcommand(1);

  CommonArgs conv_args, sweep_args, timing_args, plot_args;
  auto* conv = app.add_subcommand("converge", "per-iteration traces at the configured scenario");
  add_common(conv, conv_args);
  conv->add_flag("--wall-time", conv_args.wall_time, "record wall_ms instead of 0");

  auto* sweep = app.add_subcommand("sweep", "final min-SINR across a sweep axis");
  add_common(sweep, sweep_args);
  sweep->add_option("--sweep-values", sweep_args.sweep_values, "comma-separated values");
  sweep->add_flag("--wall-time", sweep_args.wall_time, "record wall_ms instead of 0");

  auto* timing = app.add_subcommand("timing", "per-iteration wall time across elements or users");
  add_common(timing, timing_args);
  timing->add_option("--sweep-values", timing_args.sweep_values, "comma-separated values");

  auto* plots = app.add_subcommand("plots", "write plot_results.py for the CSVs in --out");
  add_common(plots, plot_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (conv->parsed()) {
      const auto cfg = build_config(conv_args);
      const auto r = tris::run_convergence(cfg);
      report(tris::write_csv(cfg.out_dir, "convergence.csv", r), r);
    } else if (sweep->parsed()) {
      const auto cfg = build_config(sweep_args);
      const auto r = tris::run_sweep(cfg);
      report(tris::write_csv(cfg.out_dir, "sweep_" + tris::to_string(cfg.sweep_axis) + ".csv", r),
             r);
    } else if (timing->parsed()) {
      auto args = timing_args;
      if (args.sweep_axis.empty()) args.sweep_axis = "elements";
      const auto cfg = build_config(args);
      const auto r = tris::run_timing(cfg);
      report(tris::write_csv(cfg.out_dir, "timing_" + tris::to_string(cfg.sweep_axis) + ".csv", r),
             r);
    } else if (plots->parsed()) {
      const auto cfg = build_config(plot_args);
      std::cout << "wrote " << tris::emit_plots(cfg.out_dir).string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
