#include "tris/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tris {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string fmt_exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& v, const std::string& where) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(where + ": expected a number, got '" + v + "'");
  }
  if (pos != v.size()) throw std::invalid_argument(where + ": expected a number, got '" + v + "'");
  return x;
}

int parse_int(const std::string& v, const std::string& where) {
  const double x = parse_double(v, where);
  if (x != std::floor(x) || std::abs(x) > 1e9)
    throw std::invalid_argument(where + ": expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument(where + ": expected true/false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& v, const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(item, where));
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_exact(v[i]);
  return s;
}

std::string join_seeds(const std::vector<std::uint64_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

bool is_int(double x) { return x == std::floor(x) && x >= 1 && x <= 1e6; }

double to_db(double x) { return 10.0 * std::log10(std::max(x, 1e-30)); }

// Runs fn(i) for i in [0, n) on up to thread_count() workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct CellOutcome {
  SolveResult result;
  double wall_ms = 0.0;
};

CellOutcome run_cell(const SystemConfig& sys, const SolverOptions& opts, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  CellOutcome out;
  try {
    const ChannelSet ch = sample_channel(sys, seed);
    out.result = solve(sys, ch, opts, seed);
  } catch (const SolverError& e) {
    throw SolverError("seed " + std::to_string(seed) + ": " + e.what());
  }
  out.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
    i = j + 1;
  }
  return r;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::none: return "none";
    case SweepAxis::power: return "power";
    case SweepAxis::elements: return "elements";
    case SweepAxis::kappa: return "kappa";
    case SweepAxis::users: return "users";
  }
  return "none";
}

SweepAxis parse_sweep_axis(const std::string& s) {
  for (SweepAxis a : {SweepAxis::none, SweepAxis::power, SweepAxis::elements, SweepAxis::kappa,
                      SweepAxis::users})
    if (s == to_string(a)) return a;
  throw std::invalid_argument("sweep_axis: expected none|power|elements|kappa|users, got '" + s +
                              "'");
}

std::string to_string(MultiplierMode mode) {
  return mode == MultiplierMode::dual_ascent ? "dual-ascent" : "paper";
}

MultiplierMode parse_multiplier_mode(const std::string& s) {
  if (s == "dual-ascent") return MultiplierMode::dual_ascent;
  if (s == "paper") return MultiplierMode::paper;
  throw std::invalid_argument("multiplier_mode: expected dual-ascent|paper, got '" + s + "'");
}

ExperimentConfig::ExperimentConfig() {
  for (std::uint64_t s = 1; s <= 20; ++s) seeds.push_back(s);
}

void ExperimentConfig::validate() const {
  if (scenario.empty() || scenario.find_first_of(",\n") != std::string::npos)
    throw std::invalid_argument("scenario: must be non-empty without commas");
  system.validate();
  solver.validate();
  if (seeds.empty()) throw std::invalid_argument("seeds: must be non-empty");
  for (double v : sweep_values) {
    if (!(v > 0)) throw std::invalid_argument("sweep_values: must be positive");
    if ((sweep_axis == SweepAxis::elements || sweep_axis == SweepAxis::users) && !is_int(v))
      throw std::invalid_argument("sweep_values: " + to_string(sweep_axis) +
                                  " values must be integers");
  }
  if (sweep_axis == SweepAxis::elements) {
    for (double v : sweep_values) {
      const int n = static_cast<int>(v);
      const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
      if (r * r != n)
        throw std::invalid_argument("sweep_values: element count " + fmt(v) +
                                    " is not a perfect square");
    }
  }
  if (timing_iters < 1) throw std::invalid_argument("timing_iters: must be >= 1");
  if (timing_repeats < 1) throw std::invalid_argument("timing_repeats: must be >= 1");
}

std::vector<double> ExperimentConfig::sweep_grid() const {
  if (!sweep_values.empty()) return sweep_values;
  switch (sweep_axis) {
    case SweepAxis::power: return {0.5, 1, 2, 4};
    case SweepAxis::elements: return {9, 16, 25, 36};
    case SweepAxis::kappa: return {0.5, 1, 2, 4, 8};
    case SweepAxis::users: return {2, 3, 4, 5, 6};
    case SweepAxis::none: break;
  }
  return {};
}

std::vector<double> ExperimentConfig::timing_grid() const {
  if (!sweep_values.empty()) return sweep_values;
  if (sweep_axis == SweepAxis::users) return {2, 4, 8, 16};
  return {64, 128, 256, 512};
}

SystemConfig apply_sweep(const SystemConfig& base, SweepAxis axis, double value) {
  SystemConfig c = base;
  switch (axis) {
    case SweepAxis::none: break;
    case SweepAxis::power: c.pt = value * 1e-3; break;
    case SweepAxis::kappa: c.kappa = value; break;
    case SweepAxis::users: c.users = static_cast<int>(value); break;
    case SweepAxis::elements: {
      const int n = static_cast<int>(value);
      int nz = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
      while (n % nz != 0) --nz;
      c.nz = nz;
      c.nx = n / nz;
      break;
    }
  }
  return c;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  auto num = [&](const std::string& t) {
    const std::string v = trim(t);
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("seeds: bad seed '" + v + "'");
    return static_cast<std::uint64_t>(std::stoull(v));
  };
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(num(item));
    } else {
      const std::uint64_t a = num(item.substr(0, dash));
      const std::uint64_t b = num(item.substr(dash + 1));
      if (b < a) throw std::invalid_argument("seeds: empty range '" + item + "'");
      for (std::uint64_t x = a; x <= b; ++x) out.push_back(x);
    }
  }
  if (out.empty()) throw std::invalid_argument("seeds: must be non-empty");
  return out;
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig c;
  SystemConfig& s = c.system;
  SolverOptions& o = c.solver;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string loc = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw std::invalid_argument(loc + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    const std::string where = loc + ": " + key;
    auto d = [&] { return parse_double(v, where); };
    auto i = [&] { return parse_int(v, where); };
    auto b = [&] { return parse_bool(v, where); };
    try {
      if (key == "scenario") c.scenario = v;
      else if (key == "nx") s.nx = i();
      else if (key == "nz") s.nz = i();
      else if (key == "users") s.users = i();
      else if (key == "spacing") s.spacing = d();
      else if (key == "wavelength") s.wavelength = d();
      else if (key == "pt") s.pt = d();
      else if (key == "pt_dbm") s.pt = dbm_to_watt(d());
      else if (key == "noise") s.noise = d();
      else if (key == "noise_dbm") s.noise = dbm_to_watt(d());
      else if (key == "beta") s.beta = d();
      else if (key == "beta_db") s.beta = db_to_linear(d());
      else if (key == "alpha") s.alpha = d();
      else if (key == "kappa") s.kappa = d();
      else if (key == "kappa_db") s.kappa = db_to_linear(d());
      else if (key == "d0") s.d0 = d();
      else if (key == "disk_radius") s.disk_radius = d();
      else if (key == "height") s.height = d();
      else if (key == "rho") o.rho = d();
      else if (key == "alpha_step") o.alpha_step = d();
      else if (key == "beta_step") o.beta_step = d();
      else if (key == "tau_step") o.tau_step = d();
      else if (key == "step_decay") o.step_decay = b();
      else if (key == "epsilon") o.epsilon = d();
      else if (key == "max_iters") o.max_iters = i();
      else if (key == "multiplier_mode") o.mode = parse_multiplier_mode(v);
      else if (key == "multiplier_solve") {
        if (v == "exact") o.multiplier_solve = MultiplierSolve::exact;
        else if (v == "step") o.multiplier_solve = MultiplierSolve::step;
        else throw std::invalid_argument(where + ": expected exact|step");
      } else if (key == "penalty") {
        if (v == "adaptive") o.penalty = PenaltyScaling::adaptive;
        else if (v == "fixed") o.penalty = PenaltyScaling::fixed;
        else throw std::invalid_argument(where + ": expected adaptive|fixed");
      } else if (key == "inner_steps") o.inner_steps = i();
      else if (key == "consensus_passes") o.consensus_passes = i();
      else if (key == "full_copies") o.full_copies = b();
      else if (key == "gamma_drift") o.gamma_drift = d();
      else if (key == "gamma_drift_start") o.gamma_drift_start = d();
      else if (key == "drift_decay") o.drift_decay = d();
      else if (key == "eta_weight") o.eta_weight = d();
      else if (key == "scale_floor") o.scale_floor = d();
      else if (key == "monotone_scale") o.monotone_scale = b();
      else if (key == "max_restarts") o.max_restarts = i();
      else if (key == "divergence_residual") o.divergence_residual = d();
      else if (key == "report_projection") o.report_projection = b();
      else if (key == "seeds") c.seeds = parse_seed_list(v);
      else if (key == "sweep_axis") c.sweep_axis = parse_sweep_axis(v);
      else if (key == "sweep_values") c.sweep_values = parse_list(v, where);
      else if (key == "out_dir") c.out_dir = v;
      else if (key == "record_wall_time") c.record_wall_time = b();
      else if (key == "timing_iters") c.timing_iters = i();
      else if (key == "timing_repeats") c.timing_repeats = i();
      else throw std::invalid_argument(loc + ": unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      if (msg.rfind(source, 0) == 0) throw;
      throw std::invalid_argument(loc + ": " + msg);
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config '" + path.string() + "'");
  return parse_config(in, path.string());
}

void save_config(std::ostream& out, const ExperimentConfig& c) {
  const SystemConfig& s = c.system;
  const SolverOptions& o = c.solver;
  auto kv = [&](const char* k, const std::string& v) { out << k << " = " << v << "\n"; };
  auto kd = [&](const char* k, double v) { kv(k, fmt_exact(v)); };
  auto kb = [&](const char* k, bool v) { kv(k, v ? "true" : "false"); };
  kv("scenario", c.scenario);
  kd("nx", s.nx);
  kd("nz", s.nz);
  kd("users", s.users);
  kd("spacing", s.spacing);
  kd("wavelength", s.wavelength);
  kd("pt", s.pt);
  kd("noise", s.noise);
  kd("beta", s.beta);
  kd("alpha", s.alpha);
  kd("kappa", s.kappa);
  kd("d0", s.d0);
  kd("disk_radius", s.disk_radius);
  kd("height", s.height);
  kd("rho", o.rho);
  kd("alpha_step", o.alpha_step);
  kd("beta_step", o.beta_step);
  kd("tau_step", o.tau_step);
  kb("step_decay", o.step_decay);
  kd("epsilon", o.epsilon);
  kd("max_iters", o.max_iters);
  kv("multiplier_mode", to_string(o.mode));
  kv("multiplier_solve", o.multiplier_solve == MultiplierSolve::exact ? "exact" : "step");
  kv("penalty", o.penalty == PenaltyScaling::adaptive ? "adaptive" : "fixed");
  kd("inner_steps", o.inner_steps);
  kd("consensus_passes", o.consensus_passes);
  kb("full_copies", o.full_copies);
  kd("gamma_drift", o.gamma_drift);
  kd("gamma_drift_start", o.gamma_drift_start);
  kd("drift_decay", o.drift_decay);
  kd("eta_weight", o.eta_weight);
  kd("scale_floor", o.scale_floor);
  kb("monotone_scale", o.monotone_scale);
  kd("max_restarts", o.max_restarts);
  kd("divergence_residual", o.divergence_residual);
  kb("report_projection", o.report_projection);
  kv("seeds", join_seeds(c.seeds));
  kv("sweep_axis", to_string(c.sweep_axis));
  kv("sweep_values", join(c.sweep_values));
  kv("out_dir", c.out_dir);
  kb("record_wall_time", c.record_wall_time);
  kd("timing_iters", c.timing_iters);
  kd("timing_repeats", c.timing_repeats);
}

std::string config_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  save_config(os, cfg);
  return os.str();
}

ExperimentResult run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.seeds.size();
  std::vector<CellOutcome> cells(n);
  parallel_for(n, [&](std::size_t i) { cells[i] = run_cell(cfg.system, cfg.solver, cfg.seeds[i]); });

  ExperimentResult out;
  out.kind = "convergence";
  int converged = 0;
  std::vector<double> iters;
  for (std::size_t i = 0; i < n; ++i) {
    const SolveTrace& tr = cells[i].result.trace;
    converged += tr.converged ? 1 : 0;
    iters.push_back(static_cast<double>(tr.rows.size()));
    for (const TraceRow& t : tr.rows) {
      ResultRow r;
      r.scenario = cfg.scenario;
      r.seed = cfg.seeds[i];
      r.iter = t.iter;
      r.gamma = t.gamma;
      r.min_sinr_db = to_db(t.min_sinr);
      r.max_residual = t.max_residual();
      r.wall_ms = cfg.record_wall_time ? t.wall_ms : 0.0;
      out.rows.push_back(r);
    }
  }
  out.summary.push_back("converged," + std::to_string(converged) + "," + std::to_string(n));
  out.summary.push_back("median_iters," + fmt(median(iters)));
  out.summary.push_back("max_iters," + fmt(*std::max_element(iters.begin(), iters.end())));
  return out;
}

ExperimentResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.sweep_axis == SweepAxis::none)
    throw std::invalid_argument("sweep_axis: a sweep needs an axis");
  const std::vector<double> grid = cfg.sweep_grid();
  const std::size_t nv = grid.size();
  const std::size_t ns = cfg.seeds.size();
  std::vector<CellOutcome> cells(nv * ns);
  parallel_for(nv * ns, [&](std::size_t c) {
    const SystemConfig sys = apply_sweep(cfg.system, cfg.sweep_axis, grid[c / ns]);
    cells[c] = run_cell(sys, cfg.solver, cfg.seeds[c % ns]);
  });

  ExperimentResult out;
  out.kind = "sweep";
  std::vector<std::vector<double>> db(ns, std::vector<double>(nv));
  std::vector<double> mean_db(nv, 0.0);
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t s = 0; s < ns; ++s) {
      const CellOutcome& cell = cells[v * ns + s];
      const SolveTrace& tr = cell.result.trace;
      ResultRow r;
      r.scenario = cfg.scenario;
      r.seed = cfg.seeds[s];
      r.sweep_value = grid[v];
      r.iter = tr.rows.empty() ? 0 : tr.rows.back().iter;
      r.gamma = tr.rows.empty() ? 0.0 : tr.rows.back().gamma;
      r.min_sinr_db = to_db(cell.result.min_sinr);
      r.max_residual = tr.rows.empty() ? 0.0 : tr.rows.back().max_residual();
      r.wall_ms = cfg.record_wall_time ? cell.wall_ms : 0.0;
      out.rows.push_back(r);
      db[s][v] = r.min_sinr_db;
      mean_db[v] += r.min_sinr_db / static_cast<double>(ns);
    }
  }
  double rho_mean = 0.0;
  for (std::size_t s = 0; s < ns; ++s) {
    const double rho = spearman(grid, db[s]);
    rho_mean += rho / static_cast<double>(ns);
    out.summary.push_back("spearman," + std::to_string(cfg.seeds[s]) + "," + fmt(rho));
  }
  out.summary.push_back("spearman_mean," + fmt(rho_mean));
  bool increasing = true;
  for (std::size_t v = 0; v < nv; ++v) {
    out.summary.push_back("mean_min_sinr_db," + fmt(grid[v]) + "," + fmt(mean_db[v]));
    if (v > 0 && !(mean_db[v] > mean_db[v - 1])) increasing = false;
  }
  out.summary.push_back(std::string("means_strictly_increasing,") + (increasing ? "1" : "0"));
  return out;
}

ExperimentResult run_timing(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.sweep_axis != SweepAxis::elements && cfg.sweep_axis != SweepAxis::users)
    throw std::invalid_argument("sweep_axis: timing needs elements or users");
  const std::vector<double> grid = cfg.timing_grid();
  const std::uint64_t seed = cfg.seeds.front();
  ExperimentResult out;
  out.kind = "timing";
  std::vector<double> per_iter;
  for (double value : grid) {
    const SystemConfig sys = apply_sweep(cfg.system, cfg.sweep_axis, value);
    const ChannelSet ch = sample_channel(sys, seed);
    const Problem prob = Problem::normalized(ch.h, sys.pt, sys.noise);
    std::vector<double> samples;
    TraceRow last;
    for (int rep = 0; rep < cfg.timing_repeats; ++rep) {
      AdmmSolver solver(prob, cfg.solver, seed);
      solver.iterate();  // warm-up
      const auto t0 = std::chrono::steady_clock::now();
      for (int it = 0; it < cfg.timing_iters; ++it) last = solver.iterate();
      const double ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      samples.push_back(ms / cfg.timing_iters);
    }
    ResultRow r;
    r.scenario = cfg.scenario;
    r.seed = seed;
    r.sweep_value = value;
    r.iter = last.iter;
    r.gamma = last.gamma;
    r.min_sinr_db = to_db(last.min_sinr);
    r.max_residual = last.max_residual();
    r.wall_ms = median(samples);
    per_iter.push_back(r.wall_ms);
    out.rows.push_back(r);
    out.summary.push_back("median_ms_per_iter," + fmt(value) + "," + fmt(r.wall_ms));
  }
  out.summary.push_back("loglog_slope," + fmt(loglog_slope(grid, per_iter)));
  return out;
}

void write_csv(std::ostream& out, const ExperimentResult& result) {
  out << kCsvVersion << " " << result.kind << "\n" << kCsvHeader << "\n";
  for (const ResultRow& r : result.rows) {
    out << r.scenario << "," << r.seed << "," << fmt(r.sweep_value) << "," << r.iter << ","
        << fmt(r.gamma) << "," << fmt(r.min_sinr_db) << "," << fmt(r.max_residual) << ","
        << fmt(r.wall_ms) << "\n";
  }
  for (const std::string& s : result.summary) out << "# summary," << s << "\n";
}

fs::path write_csv(const fs::path& dir, const std::string& name, const ExperimentResult& result) {
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  write_csv(out, result);
  return p;
}

fs::path emit_plots(const fs::path& csv_dir) {
  std::vector<std::string> conv, sweeps, timings;
  if (fs::is_directory(csv_dir)) {
    for (const auto& e : fs::directory_iterator(csv_dir)) {
      const std::string name = e.path().filename().string();
      if (e.path().extension() != ".csv") continue;
      if (name == "convergence.csv") conv.push_back(name);
      else if (name.rfind("sweep_", 0) == 0) sweeps.push_back(name);
      else if (name.rfind("timing_", 0) == 0) timings.push_back(name);
    }
  }
  if (conv.empty() && sweeps.empty() && timings.empty())
    throw std::runtime_error("no result CSVs in '" + csv_dir.string() +
                             "'; expected convergence.csv, sweep_<axis>.csv or timing_<axis>.csv");
  std::sort(sweeps.begin(), sweeps.end());
  std::sort(timings.begin(), timings.end());
  auto pylist = [](const std::vector<std::string>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + ("\"" + v[i] + "\"");
    return s + "]";
  };

  std::ostringstream py;
  py << "#!/usr/bin/env python3\n"
        "# Renders figures from the CSVs in this directory: python3 plot_results.py\n"
        "import csv\n"
        "import os\n"
        "from collections import defaultdict\n\n"
        "import matplotlib\n"
        "matplotlib.use(\"Agg\")\n"
        "import matplotlib.pyplot as plt\n\n"
        "HERE = os.path.dirname(os.path.abspath(__file__))\n"
     << "CONVERGENCE = " << pylist(conv) << "\n"
     << "SWEEPS = " << pylist(sweeps) << "\n"
     << "TIMINGS = " << pylist(timings) << "\n\n"
     << "\n"
        "def rows(name):\n"
        "    with open(os.path.join(HERE, name)) as f:\n"
        "        return list(csv.DictReader(line for line in f if not line.startswith(\"#\")))\n\n\n"
        "def convergence(name):\n"
        "    by_seed = defaultdict(list)\n"
        "    for r in rows(name):\n"
        "        by_seed[r[\"seed\"]].append((int(r[\"iter\"]), float(r[\"min_sinr_db\"])))\n"
        "    fig, ax = plt.subplots()\n"
        "    for seed, pts in sorted(by_seed.items()):\n"
        "        pts.sort()\n"
        "        ax.plot([p[0] for p in pts], [p[1] for p in pts], lw=0.8)\n"
        "    ax.set_xlabel(\"iteration\")\n"
        "    ax.set_ylabel(\"min SINR (dB)\")\n"
        "    fig.savefig(os.path.join(HERE, name.replace(\".csv\", \".png\")), dpi=150)\n\n\n"
        "def sweep(name):\n"
        "    by_value = defaultdict(list)\n"
        "    for r in rows(name):\n"
        "        by_value[float(r[\"sweep_value\"])].append(float(r[\"min_sinr_db\"]))\n"
        "    xs = sorted(by_value)\n"
        "    fig, ax = plt.subplots()\n"
        "    ax.plot(xs, [sum(by_value[x]) / len(by_value[x]) for x in xs], \"o-\")\n"
        "    ax.set_xlabel(name[len(\"sweep_\"):-len(\".csv\")])\n"
        "    ax.set_ylabel(\"mean min SINR (dB)\")\n"
        "    fig.savefig(os.path.join(HERE, name.replace(\".csv\", \".png\")), dpi=150)\n\n\n"
        "def timing(name):\n"
        "    data = sorted((float(r[\"sweep_value\"]), float(r[\"wall_ms\"])) for r in rows(name))\n"
        "    fig, ax = plt.subplots()\n"
        "    ax.loglog([d[0] for d in data], [d[1] for d in data], \"o-\")\n"
        "    ax.set_xlabel(name[len(\"timing_\"):-len(\".csv\")])\n"
        "    ax.set_ylabel(\"ms per iteration\")\n"
        "    fig.savefig(os.path.join(HERE, name.replace(\".csv\", \".png\")), dpi=150)\n\n\n"
        "if __name__ == \"__main__\":\n"
        "    for n in CONVERGENCE:\n"
        "        convergence(n)\n"
        "    for n in SWEEPS:\n"
        "        sweep(n)\n"
        "    for n in TIMINGS:\n"
        "        timing(n)\n";

  const fs::path script = csv_dir / "plot_results.py";
  std::ofstream out(script, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + script.string() + "'");
  out << py.str();
  return script;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("spearman: need two equal-length samples of size >= 2");
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("loglog_slope: need two equal-length samples of size >= 2");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw std::invalid_argument("loglog_slope: values must be > 0");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

int thread_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("TRIS_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

}  // namespace tris
