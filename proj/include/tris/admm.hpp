#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tris/system_model.hpp"

namespace tris {

/// Sign of the projected multiplier step: dual ascent adds the constraint
/// violation, the paper-literal form subtracts it.
enum class MultiplierMode { dual_ascent, paper };

/// exact: each sub-problem multiplier is solved to convergence (the Psi and
/// eta copies of a user share one multiplier and are solved jointly).
/// step: one projected step per sub-problem per pass.
enum class MultiplierSolve { exact, step };

/// adaptive: penalties rescaled every outer iteration by the current SINR
/// level; fixed: rho used as given, unit weight on every consensus term.
enum class PenaltyScaling { adaptive, fixed };

struct SolverOptions {
  double rho = 1.0;
  double alpha_step = 0.1;  // lambda_n
  double beta_step = 0.1;   // mu_k
  double tau_step = 0.1;    // theta_k
  bool step_decay = true;   // step / sqrt(r)
  double epsilon = 1e-3;
  int max_iters = 50;
  MultiplierMode mode = MultiplierMode::dual_ascent;
  MultiplierSolve multiplier_solve = MultiplierSolve::exact;
  PenaltyScaling penalty = PenaltyScaling::adaptive;
  int inner_steps = 1;        // multiplier steps per sub-problem (step mode)
  int consensus_passes = 8;   // copy/consensus sweeps per gamma update
  bool full_copies = false;   // Gamma_n agrees with F on every row, not only row n
  double gamma_drift = 0.1;   // adaptive: relative gamma push per outer iteration
  double gamma_drift_start = 0.5;  // adaptive: push at r = 1, decays toward gamma_drift
  double drift_decay = 0.7;
  double eta_weight = 0.2;    // adaptive: eta-consensus weight, times N / scale^2
  double scale_floor = 0.05;  // adaptive: scale >= floor * min_k (sum_n |h_nk|)^2, normalized h
  int max_restarts = 4;              // restarts from the best iterate after divergence
  double divergence_residual = 0.5;  // max relative residual (after iteration 2) treated as divergence
  bool monotone_scale = true;  // adaptive: scale never decreases between outer iterations
  bool report_projection = true;

  void validate() const;

  /// One projected multiplier step per sub-problem per outer iteration,
  /// fixed penalty, single consensus pass.
  static SolverOptions single_step();
};

/// Channels rescaled so that per-element power is 1 and noise is 1:
/// h_k * sqrt(P_t) / sigma_k. SINR values are unchanged by the rescaling.
struct Problem {
  MatrixXcd h;
  double pt = 1.0;

  static Problem normalized(const MatrixXcd& h_phys, double pt, const VectorXd& noise);
  static Problem normalized(const MatrixXcd& h_phys, double pt, double noise);
  int elements() const { return static_cast<int>(h.rows()); }
  int users() const { return static_cast<int>(h.cols()); }
};

/// Solver state in normalized units.
///
/// The N copies Gamma_n and error terms Xi_n differ from a shared matrix only
/// in row n, so they are stored as a shared part plus one row per copy. With
/// row consensus the shared parts track F and zero.
struct AdmmState {
  MatrixXcd f;
  double gamma = 0.0;
  MatrixXcd gamma_shared, gamma_rows;
  MatrixXcd xi_shared, xi_rows;
  std::vector<MatrixXcd> psi;
  std::vector<MatrixXcd> lam_err;
  MatrixXcd anchor;  // column k is column k of the previous Psi_k
  VectorXd eta, xi, lambda, mu, theta;
  int iter = 0;

  MatrixXcd gamma_copy(int n) const;
  MatrixXcd xi_copy(int n) const;
};

struct TraceRow {
  int iter = 0;
  double gamma = 0.0;
  double min_sinr = 0.0;
  double res_gamma = 0.0;  // max_n ||Gamma_n - F|| / ||F||
  double res_psi = 0.0;    // max_k ||Psi_k - F|| / ||F||
  double res_eta = 0.0;    // max_k |eta_k - gamma| / |gamma|
  double wall_ms = 0.0;

  double max_residual() const;
};

struct SolveTrace {
  std::vector<TraceRow> rows;
  bool converged = false;
  int restarts = 0;
  std::string stop_reason;
};

struct SolveResult {
  MatrixXcd f;  // physical units, projected feasible
  SolveTrace trace;
  double min_sinr = 0.0;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sub-problem kernels. Noise and power enter explicitly so they apply to
// physical or normalized quantities alike.

double update_gamma(const VectorXd& eta, const VectorXd& xi, double rho);

/// Literal diag(1 + lambda_n B_n)^{-1} vec(F - Xi_n).
MatrixXcd update_Gamma(const MatrixXcd& f, const MatrixXcd& xi_n, int n, double lambda_n);

/// [value +/- step * violation]^+.
double multiplier_step(double value, double violation, double step, MultiplierMode mode);

double update_lambda(double lambda, const MatrixXcd& gamma_n, int n, double pt, double step,
                     MultiplierMode mode);

/// First-order expansion of |h^H psi_k|^2 at the anchor.
double sca_lower_bound(const MatrixXcd& psi, const MatrixXcd& anchor, const VectorXcd& h, int k);

struct UserTerms {
  double signal = 0.0;        // |h^H psi_k|^2
  double interference = 0.0;  // sum_{i != k} |h^H psi_i|^2
};
UserTerms user_terms(const MatrixXcd& psi, const VectorXcd& h, int k);

/// Structured solve of (I + mu eta sum_{i!=k} H o A_i) vec(Psi)
///   = mu (H o A_k) vec(anchor) + vec(target), target = F - Lambda_k.
MatrixXcd update_Psi(const MatrixXcd& target, const VectorXcd& h, int k, double mu, double eta,
                     const VectorXcd& anchor_col);

double update_mu(double mu, const MatrixXcd& psi, const MatrixXcd& anchor, const VectorXcd& h,
                 int k, double eta, double noise, double step, MultiplierMode mode);

double update_eta(double gamma, double xi, double theta, double interference_plus_noise);

double update_theta(double theta, const MatrixXcd& psi, const VectorXcd& h, int k, double eta,
                    double noise, double step, MultiplierMode mode);

MatrixXcd update_F(const std::vector<MatrixXcd>& psi, const std::vector<MatrixXcd>& lam_err,
                   const std::vector<MatrixXcd>& gam, const std::vector<MatrixXcd>& xi_err);

MatrixXcd project_feasible(const MatrixXcd& f, double pt);

struct PsiEtaBlock {
  MatrixXcd psi;
  double eta = 0.0;
  double mu = 0.0;
  double theta = 0.0;
};

/// Joint minimizer of weight*(eta - eta_center)^2 + ||Psi - target||^2 subject
/// to the linearized SINR constraint eta * (interference + noise) <= lb(Psi),
/// with Psi from update_Psi and eta from update_eta (theta = mu / weight).
PsiEtaBlock solve_psi_eta_block(const MatrixXcd& target, const VectorXcd& h, int k,
                                const VectorXcd& anchor_col, double eta_center, double weight,
                                double noise);

// Sub-problem objectives and their Wirtinger gradients d/dX = (d/dRe - j d/dIm) / 2.

double objective_gamma(double gamma, const VectorXd& eta, const VectorXd& xi, double rho);

double lagrangian_Gamma(const MatrixXcd& gam, const MatrixXcd& f, const MatrixXcd& xi_n, int n,
                        double lambda, double pt);
MatrixXcd lagrangian_Gamma_grad(const MatrixXcd& gam, const MatrixXcd& f, const MatrixXcd& xi_n,
                                int n, double lambda);

/// Upper-bound Lagrangian of the Psi_k sub-problem (SCA at `anchor`).
double lagrangian_Psi_ub(const MatrixXcd& psi, const MatrixXcd& f, const MatrixXcd& lam_k,
                         const VectorXcd& h, int k, double mu, double eta, double noise,
                         const MatrixXcd& anchor);
/// Gradient built from the stacked channel and masking matrices (NK x NK).
MatrixXcd lagrangian_Psi_ub_grad(const MatrixXcd& psi, const MatrixXcd& f, const MatrixXcd& lam_k,
                                 const VectorXcd& h, int k, double mu, double eta,
                                 const MatrixXcd& anchor);

double lagrangian_eta(double eta, double gamma, double xi, double theta, double signal,
                      double interference_plus_noise);

double consensus_objective(const MatrixXcd& f, const std::vector<MatrixXcd>& psi,
                           const std::vector<MatrixXcd>& lam_err,
                           const std::vector<MatrixXcd>& gam,
                           const std::vector<MatrixXcd>& xi_err);

/// Consensus-ADMM loop on a normalized problem.
class AdmmSolver {
 public:
  AdmmSolver(Problem problem, SolverOptions opts, std::uint64_t seed);

  const AdmmState& state() const { return state_; }
  AdmmState& state() { return state_; }
  const Problem& problem() const { return problem_; }

  /// Penalty rho_r and eta weight for the next outer iteration.
  std::pair<double, double> penalties() const;

  void step_gamma(double rho);
  void step_Gamma();
  void step_Psi_eta(double eta_weight);
  void step_F();
  void step_errors();

  /// One outer iteration. A non-finite update or a residual above
  /// divergence_residual restarts from the best projected iterate with the
  /// gamma drift halved, up to max_restarts times.
  TraceRow iterate();
  SolveTrace run();
  int restarts() const { return restarts_; }

  /// F in physical units, projected feasible.
  MatrixXcd physical_f() const;

 private:
  double step_size(double base) const;
  double adaptive_scale() const;
  TraceRow make_row() const;
  void restart_from_best();
  void check_finite(const char* where) const;

  Problem problem_;
  SolverOptions opts_;
  AdmmState state_;
  double scale_ref_ = 1.0;
  double scale_ = 0.0;  // last adaptive scale
  MatrixXcd best_f_;    // best projected iterate
  double best_level_ = 0.0;
  int restarts_ = 0;
  double drift_scale_ = 1.0;  // halved on every restart
};

AdmmState init_state(const Problem& problem, std::uint64_t seed);

SolveResult solve(const MatrixXcd& h, double pt, double noise, const SolverOptions& opts,
                  std::uint64_t seed);
SolveResult solve(const SystemConfig& cfg, const ChannelSet& ch, const SolverOptions& opts,
                  std::uint64_t seed);

}  // namespace tris
