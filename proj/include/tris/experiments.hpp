#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tris/admm.hpp"
#include "tris/system_model.hpp"

namespace tris {

/// power: P_t in mW; elements: N with N_x * N_z = N (squares for sweeps);
/// kappa: linear Rician factor; users: K.
enum class SweepAxis { none, power, elements, kappa, users };

std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& s);
std::string to_string(MultiplierMode mode);
MultiplierMode parse_multiplier_mode(const std::string& s);

struct ExperimentConfig {
  std::string scenario = "default";
  SystemConfig system;
  SolverOptions solver;
  std::vector<std::uint64_t> seeds;  // 1..20 unless set
  SweepAxis sweep_axis = SweepAxis::none;
  std::vector<double> sweep_values;  // empty: axis defaults
  std::string out_dir = "results";
  bool record_wall_time = false;  // wall_ms column of converge/sweep rows
  int timing_iters = 5;
  int timing_repeats = 5;

  ExperimentConfig();
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  std::vector<double> sweep_grid() const;
  std::vector<double> timing_grid() const;
};

/// Flat key=value text; '#' starts a comment. Omitted keys keep defaults.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<input>");
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(std::ostream& out, const ExperimentConfig& cfg);
std::string config_text(const ExperimentConfig& cfg);

/// "1-20", "3,5,8" or a mix such as "1-4,9".
std::vector<std::uint64_t> parse_seed_list(const std::string& s);

/// Copy of `base` with the sweep axis set to `value`.
SystemConfig apply_sweep(const SystemConfig& base, SweepAxis axis, double value);

struct ResultRow {
  std::string scenario;
  std::uint64_t seed = 0;
  double sweep_value = 0.0;
  int iter = 0;
  double gamma = 0.0;
  double min_sinr_db = 0.0;
  double max_residual = 0.0;
  double wall_ms = 0.0;
};

struct ExperimentResult {
  std::string kind;  // convergence, sweep, timing
  std::vector<ResultRow> rows;
  std::vector<std::string> summary;  // "name,value,..." lines
};

ExperimentResult run_convergence(const ExperimentConfig& cfg);
ExperimentResult run_sweep(const ExperimentConfig& cfg);
ExperimentResult run_timing(const ExperimentConfig& cfg);

inline constexpr const char* kCsvVersion = "# tris-results v1";
inline constexpr const char* kCsvHeader =
    "scenario,seed,sweep_value,iter,gamma,min_sinr_db,max_residual,wall_ms";

void write_csv(std::ostream& out, const ExperimentResult& result);
std::filesystem::path write_csv(const std::filesystem::path& dir, const std::string& name,
                                const ExperimentResult& result);

/// Writes plot_results.py next to the CSVs and returns its path.
std::filesystem::path emit_plots(const std::filesystem::path& csv_dir);

double spearman(const std::vector<double>& x, const std::vector<double>& y);
/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Worker threads for independent cells; TRIS_THREADS caps the count.
int thread_count();

}  // namespace tris
