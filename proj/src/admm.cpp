#include "tris/admm.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "tris/rng.hpp"

namespace tris {

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw std::invalid_argument(std::string(field) + ": " + what);
}

bool all_finite(const MatrixXcd& m) { return m.allFinite(); }

// Root of f on [lo, hi] with f(lo) > 0 >= f(hi) (or the reverse).
template <class Fn>
double bracketed_root(Fn f, double lo, double hi, double flo, double fhi) {
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  // Endpoint residuals of the same sign only arise from rounding near a root.
  if ((flo > 0) == (fhi > 0)) return std::abs(flo) < std::abs(fhi) ? lo : hi;
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                    boost::math::tools::eps_tolerance<double>(50),
                                                    iters);
  return 0.5 * (r.first + r.second);
}

// Scalar data of one user block, taken from target = F - Lambda_k.
struct BlockData {
  double interference = 0.0;  // sum_{i != k} |h^H t_i|^2
  double hh = 0.0;            // ||h||^2
  cd anchor_gain;             // h^H psi^r_k
  cd target_gain;             // h^H t_k
  double noise = 1.0;
};

// Smallest mu >= 0 with the linearized constraint satisfied at Psi(mu, eta).
double mu_of_eta(double eta, const BlockData& b) {
  const double a = 2.0 * std::real(std::conj(b.anchor_gain) * b.target_gain) -
                   std::norm(b.anchor_gain);
  const double slope = 2.0 * b.hh * std::norm(b.anchor_gain);
  auto g = [&](double m) {
    const double d = 1.0 + m * eta * b.hh;
    return eta * (b.interference / (d * d) + b.noise) - (a + slope * m);
  };
  const double g0 = g(0.0);
  if (g0 <= 0) return 0.0;
  if (slope <= 0) return std::numeric_limits<double>::infinity();
  const double hi = std::max(g0 / slope, 1e-300);
  return bracketed_root(g, 0.0, hi, g0, g(hi));
}

double interference_after(double mu, double eta, const BlockData& b) {
  const double d = 1.0 + mu * eta * b.hh;
  return b.interference / (d * d);
}

}  // namespace

void SolverOptions::validate() const {
  require(rho > 0, "rho", "must be > 0");
  require(alpha_step > 0, "alpha_step", "must be > 0");
  require(beta_step > 0, "beta_step", "must be > 0");
  require(tau_step > 0, "tau_step", "must be > 0");
  require(epsilon > 0, "epsilon", "must be > 0");
  require(max_iters >= 1, "max_iters", "must be >= 1");
  require(inner_steps >= 1, "inner_steps", "must be >= 1");
  require(consensus_passes >= 1, "consensus_passes", "must be >= 1");
  require(gamma_drift > 0, "gamma_drift", "must be > 0");
  require(gamma_drift_start > 0, "gamma_drift_start", "must be > 0");
  require(drift_decay >= 0 && drift_decay < 1, "drift_decay", "must be in [0, 1)");
  require(eta_weight > 0, "eta_weight", "must be > 0");
  require(scale_floor >= 0, "scale_floor", "must be >= 0");
  require(max_restarts >= 0, "max_restarts", "must be >= 0");
  require(divergence_residual > 0, "divergence_residual", "must be > 0");
}

SolverOptions SolverOptions::single_step() {
  SolverOptions o;
  o.multiplier_solve = MultiplierSolve::step;
  o.penalty = PenaltyScaling::fixed;
  o.consensus_passes = 1;
  return o;
}

Problem Problem::normalized(const MatrixXcd& h_phys, double pt, const VectorXd& noise) {
  require(pt > 0, "pt", "must be > 0");
  require(noise.size() == h_phys.cols(), "noise", "one entry per user");
  Problem p;
  p.pt = pt;
  p.h.resize(h_phys.rows(), h_phys.cols());
  for (int k = 0; k < h_phys.cols(); ++k) {
    require(noise(k) > 0, "noise", "must be > 0");
    p.h.col(k) = h_phys.col(k) * std::sqrt(pt / noise(k));
  }
  return p;
}

Problem Problem::normalized(const MatrixXcd& h_phys, double pt, double noise) {
  return normalized(h_phys, pt, VectorXd::Constant(h_phys.cols(), noise));
}

MatrixXcd AdmmState::gamma_copy(int n) const {
  MatrixXcd g = gamma_shared;
  g.row(n) = gamma_rows.row(n);
  return g;
}

MatrixXcd AdmmState::xi_copy(int n) const {
  MatrixXcd x = xi_shared;
  x.row(n) = xi_rows.row(n);
  return x;
}

double TraceRow::max_residual() const { return std::max({res_gamma, res_psi, res_eta}); }

// ---- kernels ----

double update_gamma(const VectorXd& eta, const VectorXd& xi, double rho) {
  const double k = static_cast<double>(eta.size());
  return (1.0 + rho * (eta + xi).sum()) / (rho * k);
}

MatrixXcd update_Gamma(const MatrixXcd& f, const MatrixXcd& xi_n, int n, double lambda_n) {
  MatrixXcd g = f - xi_n;
  g.row(n) /= (1.0 + lambda_n);
  return g;
}

double multiplier_step(double value, double violation, double step, MultiplierMode mode) {
  const double s = mode == MultiplierMode::dual_ascent ? 1.0 : -1.0;
  return std::max(0.0, value + s * step * violation);
}

double update_lambda(double lambda, const MatrixXcd& gamma_n, int n, double pt, double step,
                     MultiplierMode mode) {
  return multiplier_step(lambda, per_element_power(gamma_n, n) - pt, step, mode);
}

double sca_lower_bound(const MatrixXcd& psi, const MatrixXcd& anchor, const VectorXcd& h, int k) {
  const cd c = h.dot(psi.col(k));
  const cd cr = h.dot(anchor.col(k));
  return std::norm(cr) + 2.0 * std::real(std::conj(cr) * (c - cr));
}

UserTerms user_terms(const MatrixXcd& psi, const VectorXcd& h, int k) {
  const VectorXcd c = psi.adjoint() * h;  // conj(h^H psi_i)
  UserTerms t;
  t.signal = std::norm(c(k));
  t.interference = std::max(c.squaredNorm() - t.signal, 0.0);
  return t;
}

MatrixXcd update_Psi(const MatrixXcd& target, const VectorXcd& h, int k, double mu, double eta,
                     const VectorXcd& anchor_col) {
  const double hh = h.squaredNorm();
  const double c = mu * eta;
  MatrixXcd psi = target;
  for (int i = 0; i < target.cols(); ++i) {
    if (i == k) {
      if (mu != 0.0) psi.col(i) += (mu * h.dot(anchor_col)) * h;
    } else if (c != 0.0) {
      const cd ct = h.dot(target.col(i));
      psi.col(i) -= (c * ct / (1.0 + c * hh)) * h;
    }
  }
  return psi;
}

double update_mu(double mu, const MatrixXcd& psi, const MatrixXcd& anchor, const VectorXcd& h,
                 int k, double eta, double noise, double step, MultiplierMode mode) {
  const UserTerms t = user_terms(psi, h, k);
  const double g = eta * (t.interference + noise) - sca_lower_bound(psi, anchor, h, k);
  return multiplier_step(mu, g, step, mode);
}

double update_eta(double gamma, double xi, double theta, double interference_plus_noise) {
  return gamma - xi - 0.5 * theta * interference_plus_noise;
}

double update_theta(double theta, const MatrixXcd& psi, const VectorXcd& h, int k, double eta,
                    double noise, double step, MultiplierMode mode) {
  const UserTerms t = user_terms(psi, h, k);
  return multiplier_step(theta, eta * (t.interference + noise) - t.signal, step, mode);
}

MatrixXcd update_F(const std::vector<MatrixXcd>& psi, const std::vector<MatrixXcd>& lam_err,
                   const std::vector<MatrixXcd>& gam, const std::vector<MatrixXcd>& xi_err) {
  if (psi.empty() || gam.empty()) throw std::invalid_argument("update_F: empty copies");
  MatrixXcd acc = MatrixXcd::Zero(psi[0].rows(), psi[0].cols());
  for (std::size_t k = 0; k < psi.size(); ++k) acc += psi[k] + lam_err[k];
  for (std::size_t n = 0; n < gam.size(); ++n) acc += gam[n] + xi_err[n];
  return acc / static_cast<double>(psi.size() + gam.size());
}

MatrixXcd project_feasible(const MatrixXcd& f, double pt) {
  if (!(pt > 0)) throw std::invalid_argument("project_feasible: pt must be > 0");
  MatrixXcd out = f;
  for (int n = 0; n < f.rows(); ++n) {
    const double p = f.row(n).squaredNorm();
    if (p > pt) out.row(n) *= std::sqrt(pt / p);
  }
  return out;
}

PsiEtaBlock solve_psi_eta_block(const MatrixXcd& target, const VectorXcd& h, int k,
                                const VectorXcd& anchor_col, double eta_center, double weight,
                                double noise) {
  BlockData b;
  const VectorXcd ct = target.adjoint() * h;  // conj(h^H t_i)
  b.hh = h.squaredNorm();
  b.anchor_gain = h.dot(anchor_col);
  b.target_gain = std::conj(ct(k));
  b.interference = std::max(ct.squaredNorm() - std::norm(ct(k)), 0.0);
  b.noise = noise;

  PsiEtaBlock out;
  auto finish = [&](double eta, double mu) {
    out.eta = eta;
    out.mu = mu;
    out.theta = mu / weight;
    out.psi = update_Psi(target, h, k, mu, std::max(eta, 0.0), anchor_col);
    return out;
  };

  // SINR copies are nonnegative, so eta lives on [0, inf).
  if (std::norm(b.anchor_gain) == 0.0) return finish(0.0, 0.0);  // lb == 0
  if (eta_center <= 0.0) return finish(0.0, mu_of_eta(0.0, b));
  if (mu_of_eta(eta_center, b) == 0.0) return finish(eta_center, 0.0);

  // Stationarity in eta: eta - center + mu(eta) q(eta) / (2 weight) = 0.
  auto resid = [&](double eta) {
    const double m = mu_of_eta(eta, b);
    return eta - eta_center + m * (interference_after(m, eta, b) + b.noise) / (2.0 * weight);
  };
  const double r0 = resid(0.0);
  if (r0 >= 0.0) return finish(0.0, mu_of_eta(0.0, b));
  const double eta = bracketed_root(resid, 0.0, eta_center, r0, resid(eta_center));
  return finish(eta, mu_of_eta(eta, b));
}

// ---- objectives and gradients ----

double objective_gamma(double gamma, const VectorXd& eta, const VectorXd& xi, double rho) {
  return -gamma + 0.5 * rho * (eta.array() - gamma + xi.array()).square().sum();
}

double lagrangian_Gamma(const MatrixXcd& gam, const MatrixXcd& f, const MatrixXcd& xi_n, int n,
                        double lambda, double pt) {
  return (gam - f + xi_n).squaredNorm() + lambda * (per_element_power(gam, n) - pt);
}

MatrixXcd lagrangian_Gamma_grad(const MatrixXcd& gam, const MatrixXcd& f, const MatrixXcd& xi_n,
                                int n, double lambda) {
  const int nn = static_cast<int>(gam.rows());
  const int kk = static_cast<int>(gam.cols());
  const VectorXd b = index_vector_b(n, nn, kk);
  const VectorXcd g = vec(gam - f + xi_n).conjugate() +
                      lambda * b.cast<cd>().cwiseProduct(vec(gam).conjugate());
  return Eigen::Map<const MatrixXcd>(g.data(), nn, kk);
}

double lagrangian_Psi_ub(const MatrixXcd& psi, const MatrixXcd& f, const MatrixXcd& lam_k,
                         const VectorXcd& h, int k, double mu, double eta, double noise,
                         const MatrixXcd& anchor) {
  const UserTerms t = user_terms(psi, h, k);
  return (psi - f + lam_k).squaredNorm() +
         mu * (eta * (t.interference + noise) - sca_lower_bound(psi, anchor, h, k));
}

MatrixXcd lagrangian_Psi_ub_grad(const MatrixXcd& psi, const MatrixXcd& f, const MatrixXcd& lam_k,
                                 const VectorXcd& h, int k, double mu, double eta,
                                 const MatrixXcd& anchor) {
  const int nn = static_cast<int>(psi.rows());
  const int kk = static_cast<int>(psi.cols());
  VectorXcd ht(nn * kk);
  for (int i = 0; i < kk; ++i) ht.segment(i * nn, nn) = h;
  const MatrixXcd hk = ht * ht.adjoint();
  const MatrixXcd hk_t = hk.transpose();
  const VectorXcd x_conj = vec(psi).conjugate();
  const VectorXcd r_conj = vec(anchor).conjugate();
  VectorXcd g = vec(psi - f + lam_k).conjugate();
  for (int i = 0; i < kk; ++i) {
    const VectorXd a = index_vector_a(i, nn, kk);
    const MatrixXcd masked = hk_t.cwiseProduct((a * a.transpose()).cast<cd>());
    if (i == k)
      g -= mu * (masked * r_conj);
    else
      g += mu * eta * (masked * x_conj);
  }
  return Eigen::Map<const MatrixXcd>(g.data(), nn, kk);
}

double lagrangian_eta(double eta, double gamma, double xi, double theta, double signal,
                      double interference_plus_noise) {
  const double d = eta - gamma + xi;
  return d * d + theta * (eta * interference_plus_noise - signal);
}

double consensus_objective(const MatrixXcd& f, const std::vector<MatrixXcd>& psi,
                           const std::vector<MatrixXcd>& lam_err,
                           const std::vector<MatrixXcd>& gam,
                           const std::vector<MatrixXcd>& xi_err) {
  double v = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) v += (psi[k] - f + lam_err[k]).squaredNorm();
  for (std::size_t n = 0; n < gam.size(); ++n) v += (gam[n] - f + xi_err[n]).squaredNorm();
  return v;
}

// ---- solver ----

AdmmState init_state(const Problem& problem, std::uint64_t seed) {
  const int n = problem.elements();
  const int k = problem.users();
  if (n < 1 || k < 1) throw std::invalid_argument("init_state: empty problem");
  Rng rng(derive_seed(seed, 7));
  AdmmState s;
  s.f.resize(n, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) s.f(i, j) = rng.complex_normal();
  for (int i = 0; i < n; ++i) s.f.row(i).normalize();
  s.gamma = min_sinr(s.f, problem.h, 1.0);
  s.gamma_shared = s.f;
  s.gamma_rows = s.f;
  s.xi_shared = MatrixXcd::Zero(n, k);
  s.xi_rows = MatrixXcd::Zero(n, k);
  s.psi.assign(k, s.f);
  s.lam_err.assign(k, MatrixXcd::Zero(n, k));
  s.anchor = s.f;
  s.eta = VectorXd::Constant(k, s.gamma);
  s.xi = VectorXd::Zero(k);
  s.lambda = VectorXd::Zero(n);
  s.mu = VectorXd::Zero(k);
  s.theta = VectorXd::Zero(k);
  return s;
}

AdmmSolver::AdmmSolver(Problem problem, SolverOptions opts, std::uint64_t seed)
    : problem_(std::move(problem)), opts_(opts) {
  opts_.validate();
  if (!problem_.h.allFinite()) throw std::invalid_argument("solve: non-finite channel");
  state_ = init_state(problem_, seed);
  scale_ref_ = std::numeric_limits<double>::infinity();
  for (int k = 0; k < problem_.users(); ++k)
    scale_ref_ = std::min(scale_ref_, std::pow(problem_.h.col(k).cwiseAbs().sum(), 2));
  best_f_ = project_feasible(state_.f, 1.0);
  best_level_ = min_sinr(best_f_, problem_.h, 1.0);
}

double AdmmSolver::adaptive_scale() const {
  const double level = min_sinr(project_feasible(state_.f, 1.0), problem_.h, 1.0);
  double scale = std::max({level, 1e-300, opts_.scale_floor * scale_ref_});
  if (opts_.monotone_scale) scale = std::max(scale, scale_);
  return scale;
}

std::pair<double, double> AdmmSolver::penalties() const {
  if (opts_.penalty == PenaltyScaling::fixed) return {opts_.rho, 1.0};
  const double scale = adaptive_scale();
  const double k = problem_.users();
  const double n = problem_.elements();
  const int r = std::max(state_.iter, 1);
  const double drift = drift_scale_ * (opts_.gamma_drift + (opts_.gamma_drift_start -
                                                             opts_.gamma_drift) *
                                                                std::pow(opts_.drift_decay, r - 1));
  return {opts_.rho / (drift * k * scale), opts_.eta_weight * n / (scale * scale)};
}

double AdmmSolver::step_size(double base) const {
  const int r = std::max(state_.iter, 1);
  return opts_.step_decay ? base / std::sqrt(static_cast<double>(r)) : base;
}

void AdmmSolver::check_finite(const char* where) const {
  const AdmmState& s = state_;
  bool ok = std::isfinite(s.gamma) && all_finite(s.f) && all_finite(s.gamma_shared) &&
            all_finite(s.gamma_rows) && all_finite(s.xi_shared) && all_finite(s.xi_rows) &&
            s.eta.allFinite() && s.xi.allFinite() && s.lambda.allFinite() && s.mu.allFinite() &&
            s.theta.allFinite();
  for (const auto& m : s.psi) ok = ok && all_finite(m);
  for (const auto& m : s.lam_err) ok = ok && all_finite(m);
  if (!ok)
    throw SolverError(std::string("non-finite value after ") + where + " at iteration " +
                      std::to_string(s.iter));
}

void AdmmSolver::step_gamma(double rho) {
  state_.gamma = update_gamma(state_.eta, state_.xi, rho);
  check_finite("update_gamma");
}

void AdmmSolver::step_Gamma() {
  AdmmState& s = state_;
  const int n_el = problem_.elements();
  // Rows outside n are shared by every copy.
  s.gamma_shared = s.f - s.xi_shared;
  const double alpha = step_size(opts_.alpha_step);
  for (int n = 0; n < n_el; ++n) {
    const Eigen::RowVectorXcd t = s.f.row(n) - s.xi_rows.row(n);
    if (opts_.multiplier_solve == MultiplierSolve::exact) {
      s.lambda(n) = std::max(0.0, t.norm() - 1.0);
      s.gamma_rows.row(n) = t / (1.0 + s.lambda(n));
    } else {
      for (int j = 0; j < opts_.inner_steps; ++j) {
        s.gamma_rows.row(n) = t / (1.0 + s.lambda(n));
        s.lambda(n) = multiplier_step(s.lambda(n), s.gamma_rows.row(n).squaredNorm() - 1.0,
                                      alpha, opts_.mode);
      }
    }
  }
  check_finite("update_Gamma");
}

void AdmmSolver::step_Psi_eta(double eta_weight) {
  AdmmState& s = state_;
  const double beta = step_size(opts_.beta_step);
  const double tau = step_size(opts_.tau_step);
  for (int k = 0; k < problem_.users(); ++k) {
    const VectorXcd h = problem_.h.col(k);
    const MatrixXcd target = s.f - s.lam_err[k];
    const VectorXcd anchor_col = s.anchor.col(k);
    if (opts_.multiplier_solve == MultiplierSolve::exact) {
      const PsiEtaBlock b =
          solve_psi_eta_block(target, h, k, anchor_col, s.gamma - s.xi(k), eta_weight, 1.0);
      s.psi[k] = b.psi;
      s.eta(k) = b.eta;
      s.mu(k) = b.mu;
      s.theta(k) = b.theta;
    } else {
      for (int j = 0; j < opts_.inner_steps; ++j) {
        s.psi[k] = update_Psi(target, h, k, s.mu(k), std::max(s.eta(k), 0.0), anchor_col);
        MatrixXcd anchor_full = s.psi[k];
        anchor_full.col(k) = anchor_col;
        s.mu(k) = update_mu(s.mu(k), s.psi[k], anchor_full, h, k, s.eta(k), 1.0, beta, opts_.mode);
      }
      for (int j = 0; j < opts_.inner_steps; ++j) {
        const UserTerms t = user_terms(s.psi[k], h, k);
        s.eta(k) = update_eta(s.gamma, s.xi(k), s.theta(k), t.interference + 1.0);
        s.theta(k) = update_theta(s.theta(k), s.psi[k], h, k, s.eta(k), 1.0, tau, opts_.mode);
      }
    }
    s.anchor.col(k) = s.psi[k].col(k);
  }
  check_finite("update_Psi/update_eta");
}

void AdmmSolver::step_F() {
  AdmmState& s = state_;
  const int n_el = problem_.elements();
  const int k_users = problem_.users();
  MatrixXcd acc = s.gamma_rows + s.xi_rows;
  for (int k = 0; k < k_users; ++k) acc += s.psi[k] + s.lam_err[k];
  if (opts_.full_copies) {
    acc += (n_el - 1) * (s.gamma_shared + s.xi_shared);
    s.f = acc / static_cast<double>(n_el + k_users);
  } else {
    s.f = acc / static_cast<double>(1 + k_users);
    s.gamma_shared = s.f;
  }
  check_finite("update_F");
}

void AdmmSolver::step_errors() {
  AdmmState& s = state_;
  s.xi.array() += s.eta.array() - s.gamma;
  if (opts_.full_copies) s.xi_shared += s.gamma_shared - s.f;
  s.xi_rows += s.gamma_rows - s.f;
  for (int k = 0; k < problem_.users(); ++k) s.lam_err[k] += s.psi[k] - s.f;
  check_finite("update_errors");
}

TraceRow AdmmSolver::make_row() const {
  const AdmmState& s = state_;
  TraceRow row;
  row.iter = s.iter;
  row.gamma = s.gamma;
  const MatrixXcd f_rep = opts_.report_projection ? project_feasible(s.f, 1.0) : s.f;
  row.min_sinr = min_sinr(f_rep, problem_.h, 1.0);
  const double fnorm = std::max(s.f.norm(), 1e-300);
  const MatrixXcd d = s.gamma_shared - s.f;
  const MatrixXcd e = s.gamma_rows - s.f;
  const double d_all = d.squaredNorm();
  double worst = 0.0;
  for (int n = 0; n < problem_.elements(); ++n)
    worst = std::max(worst, d_all - d.row(n).squaredNorm() + e.row(n).squaredNorm());
  row.res_gamma = std::sqrt(std::max(worst, 0.0)) / fnorm;
  for (const auto& p : s.psi) row.res_psi = std::max(row.res_psi, (p - s.f).norm() / fnorm);
  const double gabs = std::max(std::abs(s.gamma), 1e-300);
  row.res_eta = (s.eta.array() - s.gamma).abs().maxCoeff() / gabs;
  return row;
}

void AdmmSolver::restart_from_best() {
  AdmmState& s = state_;
  const int n = problem_.elements();
  const int k = problem_.users();
  s.f = best_f_;
  s.gamma = best_level_;
  s.gamma_shared = s.f;
  s.gamma_rows = s.f;
  s.xi_shared = MatrixXcd::Zero(n, k);
  s.xi_rows = MatrixXcd::Zero(n, k);
  s.psi.assign(k, s.f);
  s.lam_err.assign(k, MatrixXcd::Zero(n, k));
  s.anchor = s.f;
  s.eta = VectorXd::Constant(k, s.gamma);
  s.xi = VectorXd::Zero(k);
  s.lambda = VectorXd::Zero(n);
  s.mu = VectorXd::Zero(k);
  s.theta = VectorXd::Zero(k);
  ++restarts_;
  drift_scale_ *= 0.5;
}

TraceRow AdmmSolver::iterate() {
  const auto t0 = std::chrono::steady_clock::now();
  AdmmState& s = state_;
  ++s.iter;
  const auto [rho_r, eta_weight] = penalties();
  if (opts_.penalty == PenaltyScaling::adaptive) scale_ = adaptive_scale();
  bool diverged = false;
  try {
    step_gamma(rho_r);
    for (int pass = 0; pass < opts_.consensus_passes; ++pass) {
      step_Gamma();
      step_Psi_eta(eta_weight);
      step_F();
      step_errors();
    }
  } catch (const SolverError&) {
    if (restarts_ >= opts_.max_restarts) throw;
    diverged = true;
  }

  TraceRow row;
  if (!diverged) {
    row = make_row();
    diverged = s.iter > 2 && !(row.max_residual() <= opts_.divergence_residual) &&
               restarts_ < opts_.max_restarts;
  }
  if (diverged) {
    restart_from_best();
    row = make_row();
  } else {
    const MatrixXcd fp = project_feasible(s.f, 1.0);
    const double level = min_sinr(fp, problem_.h, 1.0);
    if (level > best_level_) {
      best_level_ = level;
      best_f_ = fp;
    }
  }
  row.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

SolveTrace AdmmSolver::run() {
  SolveTrace trace;
  for (int k = 0; k < problem_.users(); ++k) {
    if (problem_.h.col(k).squaredNorm() == 0.0) {
      trace.stop_reason = "zero channel";
      return trace;
    }
  }
  for (int r = 0; r < opts_.max_iters; ++r) {
    const double prev = state_.gamma;
    trace.rows.push_back(iterate());
    if (std::abs(state_.gamma - prev) / std::max(std::abs(prev), 1e-12) < opts_.epsilon) {
      trace.converged = true;
      trace.restarts = restarts_;
      trace.stop_reason = "tolerance";
      return trace;
    }
  }
  trace.restarts = restarts_;
  trace.stop_reason = "max_iters";
  return trace;
}

MatrixXcd AdmmSolver::physical_f() const {
  return project_feasible(state_.f, 1.0) * std::sqrt(problem_.pt);
}

SolveResult solve(const MatrixXcd& h, double pt, double noise, const SolverOptions& opts,
                  std::uint64_t seed) {
  require(noise > 0, "noise", "must be > 0");
  AdmmSolver solver(Problem::normalized(h, pt, noise), opts, seed);
  SolveResult out;
  out.trace = solver.run();
  out.f = solver.physical_f();
  out.min_sinr = min_sinr(out.f, h, noise);
  return out;
}

SolveResult solve(const SystemConfig& cfg, const ChannelSet& ch, const SolverOptions& opts,
                  std::uint64_t seed) {
  cfg.validate();
  if (ch.elements() != cfg.elements() || ch.users() != cfg.users)
    throw std::invalid_argument("solve: channel shape does not match config");
  return solve(ch.h, cfg.pt, cfg.noise, opts, seed);
}

}  // namespace tris
