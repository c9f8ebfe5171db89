#include <cmath>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "test_helpers.hpp"
#include "tris/admm.hpp"
#include "tris/oracles.hpp"

using namespace tris;
using testing::random_matrix;
using testing::random_vector;

namespace {

VectorXd vecd(std::initializer_list<double> v) {
  VectorXd out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Dense NK x NK solve of the Psi_k system with masks A_i = a_i a_i^T.
MatrixXcd dense_psi(const MatrixXcd& target, const VectorXcd& h, int k, double mu, double eta,
                    const MatrixXcd& anchor) {
  const int n = static_cast<int>(target.rows());
  const int kk = static_cast<int>(target.cols());
  VectorXcd ht(n * kk);
  for (int i = 0; i < kk; ++i) ht.segment(i * n, n) = h;
  const MatrixXcd hk = ht * ht.adjoint();
  MatrixXcd m = MatrixXcd::Identity(n * kk, n * kk);
  VectorXcd rhs = vec(target);
  for (int i = 0; i < kk; ++i) {
    const VectorXd a = index_vector_a(i, n, kk);
    const MatrixXcd masked = hk.cwiseProduct((a * a.transpose()).cast<cd>());
    if (i == k) rhs += mu * masked * vec(anchor);
    else m += mu * eta * masked;
  }
  const VectorXcd x = m.fullPivLu().solve(rhs);
  return Eigen::Map<const MatrixXcd>(x.data(), n, kk);
}

}  // namespace

TEST_CASE("gamma update examples") {
  CHECK(update_gamma(vecd({0.0}), vecd({0.0}), 1.0) == doctest::Approx(1.0));
  CHECK(update_gamma(vecd({1.0, 1.5}), vecd({0.25, 0.25}), 2.0) == doctest::Approx(1.75));
  CHECK(update_gamma(vecd({1.0, 2.0}), vecd({0.5, -0.5}), 1e12) == doctest::Approx(1.5));
}

TEST_CASE("Gamma update examples") {
  Rng rng(1);
  const MatrixXcd f = random_matrix(rng, 3, 2);
  const MatrixXcd xi = random_matrix(rng, 3, 2);
  CHECK(update_Gamma(f, xi, 1, 0.0) == f - xi);

  MatrixXcd f1(1, 1);
  f1 << 2.0;
  CHECK(std::abs(update_Gamma(f1, MatrixXcd::Zero(1, 1), 0, 1.0)(0, 0) - cd(1.0, 0.0)) < 1e-15);

  const MatrixXcd g = update_Gamma(f, xi, 2, 1e12);
  CHECK(g.row(2).norm() < 1e-11);
  CHECK(g.topRows(2) == (f - xi).topRows(2));
}

TEST_CASE("multiplier update examples") {
  const MatrixXcd low = MatrixXcd::Constant(2, 2, 0.1);  // row power 0.02
  CHECK(update_lambda(0.0, low, 0, 1.0, 0.1, MultiplierMode::dual_ascent) == 0.0);
  const MatrixXcd high = MatrixXcd::Ones(2, 2);  // row power 2
  CHECK(update_lambda(0.0, high, 0, 1.0, 0.1, MultiplierMode::dual_ascent) ==
        doctest::Approx(0.1));
  CHECK(multiplier_step(1.0, 0.4, 0.5, MultiplierMode::dual_ascent) == doctest::Approx(1.2));
  CHECK(multiplier_step(1.0, 0.4, 0.5, MultiplierMode::paper) == doctest::Approx(0.8));
  CHECK(multiplier_step(2.0, -1.0, 0.1, MultiplierMode::dual_ascent) == doctest::Approx(1.9));
  CHECK(multiplier_step(1.0, 0.5, 0.2, MultiplierMode::dual_ascent) == doctest::Approx(1.1));
  CHECK(multiplier_step(0.0, -0.5, 0.2, MultiplierMode::dual_ascent) == 0.0);
  CHECK(multiplier_step(0.0, 0.5, 0.2, MultiplierMode::dual_ascent) == doctest::Approx(0.1));
  CHECK(multiplier_step(0.0, 5.0, 1.0, MultiplierMode::paper) == 0.0);
}

TEST_CASE("mu and theta updates use the SINR constraint") {
  // One element, two users: signal 1, interference 4, noise 1.
  MatrixXcd h(1, 1), psi(1, 2);
  h << 1.0;
  psi << 1.0, 2.0;
  const VectorXcd hv = h.col(0);
  // g = eta (4 + 1) - 1
  CHECK(update_theta(0.0, psi, hv, 0, 0.1, 1.0, 0.2, MultiplierMode::dual_ascent) == 0.0);
  CHECK(update_theta(0.0, psi, hv, 0, 1.0, 1.0, 0.2, MultiplierMode::dual_ascent) ==
        doctest::Approx(0.8));
  CHECK(update_mu(0.0, psi, psi, hv, 0, 1.0, 1.0, 0.1, MultiplierMode::dual_ascent) ==
        doctest::Approx(0.4));
  CHECK(update_mu(0.0, psi, psi, hv, 0, 0.1, 1.0, 0.1, MultiplierMode::dual_ascent) == 0.0);
}

TEST_CASE("eta update examples") {
  CHECK(update_eta(2.0, 0.5, 0.0, 3.0) == doctest::Approx(1.5));
  CHECK(update_eta(2.0, 0.5, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(update_eta(2.0, 0.5, 2.0, 1.0) < update_eta(2.0, 0.5, 1.0, 1.0));
}

TEST_CASE("F update examples") {
  MatrixXcd two(1, 1);
  two << 2.0;
  const MatrixXcd f = update_F({two}, {MatrixXcd::Zero(1, 1)}, {MatrixXcd::Zero(1, 1)},
                               {MatrixXcd::Zero(1, 1)});
  CHECK(std::abs(f(0, 0) - cd(1.0, 0.0)) < 1e-15);

  Rng rng(2);
  const MatrixXcd g = random_matrix(rng, 3, 2);
  const MatrixXcd z = MatrixXcd::Zero(3, 2);
  const MatrixXcd same = update_F({g, g}, {z, z}, {g, g, g}, {z, z, z});
  CHECK((same - g).norm() < 1e-14);
  CHECK_THROWS_AS(update_F({}, {}, {}, {}), std::invalid_argument);
}

TEST_CASE("projection onto the per-element power set") {
  Rng rng(3);
  MatrixXcd f = random_matrix(rng, 3, 2);
  f.row(0) *= 0.1 / f.row(0).norm();
  CHECK(project_feasible(f.topRows(1), 1.0) == f.topRows(1));

  MatrixXcd g(1, 2);
  g << 2.0, cd(0.0, 2.0);  // power 8 = 4 P_t with P_t = 2
  const MatrixXcd p = project_feasible(g, 2.0);
  CHECK((p - 0.5 * g).norm() < 1e-15);

  const MatrixXcd big = random_matrix(rng, 6, 4, 10.0);
  const MatrixXcd q = project_feasible(big, 0.7);
  for (int n = 0; n < 6; ++n) CHECK(per_element_power(q, n) <= 0.7 * (1 + 1e-12));
  CHECK_THROWS_AS(project_feasible(big, 0.0), std::invalid_argument);
}

TEST_CASE("SCA bound is tight at the anchor and a global under-estimator") {
  Rng rng(4);
  const MatrixXcd h = random_matrix(rng, 2, 2);
  const MatrixXcd anchor = random_matrix(rng, 2, 2);
  for (int k = 0; k < 2; ++k) {
    const VectorXcd hk = h.col(k);
    CHECK(sca_lower_bound(anchor, anchor, hk, k) ==
          doctest::Approx(user_terms(anchor, hk, k).signal).epsilon(1e-14));
    for (int t = 0; t < 1000; ++t) {
      const MatrixXcd psi = random_matrix(rng, 2, 2, 2.0);
      CHECK(user_terms(psi, hk, k).signal - sca_lower_bound(psi, anchor, hk, k) >= -1e-12);
    }
  }
}

TEST_CASE("SCA bound matches the stacked-vector expansion") {
  Rng rng(5);
  const int n = 3, kk = 2;
  const MatrixXcd h = random_matrix(rng, n, kk);
  const MatrixXcd psi = random_matrix(rng, n, kk);
  const MatrixXcd anchor = random_matrix(rng, n, kk);
  VectorXcd ht(n * kk);
  for (int i = 0; i < kk; ++i) ht.segment(i * n, n) = h.col(1);
  const VectorXd a = index_vector_a(1, n, kk);
  const cd c = ht.dot(vec(psi).cwiseProduct(a.cast<cd>()));
  const cd cr = ht.dot(vec(anchor).cwiseProduct(a.cast<cd>()));
  const double expect = std::norm(cr) + 2.0 * std::real(std::conj(cr) * (c - cr));
  CHECK(sca_lower_bound(psi, anchor, h.col(1), 1) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("structured Psi update equals the dense solve") {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const MatrixXcd target = random_matrix(rng, 3, 3);
    const MatrixXcd anchor = random_matrix(rng, 3, 3);
    const VectorXcd h = random_vector(rng, 3);
    const int k = t % 3;
    const double mu = rng.uniform(0.0, 3.0);
    const double eta = rng.uniform(0.0, 3.0);
    const MatrixXcd fast = update_Psi(target, h, k, mu, eta, anchor.col(k));
    const MatrixXcd dense = dense_psi(target, h, k, mu, eta, anchor);
    CHECK((fast - dense).norm() <= 1e-10 * dense.norm());
  }
}

TEST_CASE("Psi update with zero mu copies the target") {
  Rng rng(7);
  const MatrixXcd target = random_matrix(rng, 4, 3);
  CHECK(update_Psi(target, random_vector(rng, 4), 1, 0.0, 2.0, random_vector(rng, 4)) == target);
}

TEST_CASE("Psi update zeroes the upper-bound gradient") {
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const MatrixXcd f = random_matrix(rng, 3, 3);
    const MatrixXcd lam = random_matrix(rng, 3, 3, 0.3);
    const MatrixXcd anchor = random_matrix(rng, 3, 3);
    const VectorXcd h = random_vector(rng, 3);
    const int k = t % 3;
    const double mu = rng.uniform(0.1, 2.0), eta = rng.uniform(0.1, 2.0);
    const MatrixXcd psi = update_Psi(f - lam, h, k, mu, eta, anchor.col(k));
    auto obj = [&](const MatrixXcd& p) {
      return lagrangian_Psi_ub(p, f, lam, h, k, mu, eta, 1.0, anchor);
    };
    const MatrixXcd fd = finite_difference_gradient(obj, psi);
    CHECK(fd.norm() < 1e-8 * (1.0 + f.norm()) * (1.0 + mu * eta * h.squaredNorm()));
    CHECK(lagrangian_Psi_ub_grad(psi, f, lam, h, k, mu, eta, anchor).norm() < 1e-12 * (1 + f.norm()) * (1.0 + mu * eta * h.squaredNorm()));
  }
}

TEST_CASE("F update zeroes the consensus gradient") {
  Rng rng(9);
  std::vector<MatrixXcd> psi, lam, gam, xi;
  for (int k = 0; k < 2; ++k) {
    psi.push_back(random_matrix(rng, 3, 2));
    lam.push_back(random_matrix(rng, 3, 2, 0.2));
  }
  for (int n = 0; n < 3; ++n) {
    gam.push_back(random_matrix(rng, 3, 2));
    xi.push_back(random_matrix(rng, 3, 2, 0.2));
  }
  const MatrixXcd f = update_F(psi, lam, gam, xi);
  auto obj = [&](const MatrixXcd& x) { return consensus_objective(x, psi, lam, gam, xi); };
  CHECK(finite_difference_gradient(obj, f).norm() < 1e-8);
}

TEST_CASE("joint Psi/eta block satisfies the linearized constraint") {
  Rng rng(10);
  for (int t = 0; t < 50; ++t) {
    const MatrixXcd target = random_matrix(rng, 4, 3);
    const VectorXcd h = random_vector(rng, 4);
    const int k = t % 3;
    const VectorXcd anchor = target.col(k);
    const double center = rng.uniform(0.0, 5.0);
    const PsiEtaBlock b = solve_psi_eta_block(target, h, k, anchor, center, 0.5, 1.0);
    CHECK(b.mu >= 0.0);
    CHECK(b.eta >= 0.0);
    CHECK(b.eta <= center + 1e-12);
    MatrixXcd anchor_full = b.psi;
    anchor_full.col(k) = anchor;
    const UserTerms u = user_terms(b.psi, h, k);
    const double g = b.eta * (u.interference + 1.0) - sca_lower_bound(b.psi, anchor_full, h, k);
    CHECK(g <= 1e-8 * (1.0 + std::abs(b.eta) * (u.interference + 1.0)));
    if (b.mu > 0) CHECK(std::abs(g) <= 1e-8 * (1.0 + b.eta * (u.interference + 1.0)));
    CHECK(b.theta == doctest::Approx(b.mu / 0.5));
  }
}

TEST_CASE("init state properties") {
  Rng rng(11);
  const Problem p{random_matrix(rng, 6, 3), 1.0};
  const AdmmState a = init_state(p, 5);
  const AdmmState b = init_state(p, 5);
  CHECK(a.f == b.f);
  CHECK(a.gamma == b.gamma);
  for (int n = 0; n < 6; ++n) CHECK(per_element_power(a.f, n) == doctest::Approx(1.0));
  CHECK(a.gamma == doctest::Approx(min_sinr(a.f, p.h, 1.0)));
  for (int k = 0; k < 3; ++k) {
    CHECK(a.psi[k] == a.f);
    CHECK(a.eta(k) == a.gamma);
    CHECK(a.lam_err[k].norm() == 0.0);
  }
  for (int n = 0; n < 6; ++n) CHECK(a.gamma_copy(n) == a.f);
  CHECK(a.xi_rows.norm() == 0.0);
  CHECK(a.lambda.norm() == 0.0);
  CHECK(a.mu.norm() == 0.0);
  CHECK(a.theta.norm() == 0.0);
  CHECK(init_state(p, 6).f != a.f);
}

TEST_CASE("error updates accumulate the consensus residual") {
  Rng rng(12);
  const Problem p{random_matrix(rng, 3, 2), 1.0};
  AdmmSolver solver(p, SolverOptions{}, 1);
  AdmmState& s = solver.state();
  // Copies equal to F leave the errors untouched.
  solver.step_errors();
  CHECK(s.xi_rows.norm() == 0.0);
  CHECK(s.xi.norm() == 0.0);
  for (const auto& l : s.lam_err) CHECK(l.norm() == 0.0);

  const MatrixXcd delta = random_matrix(rng, 3, 2);
  s.psi[0] = s.f + delta;
  s.eta(1) = s.gamma + 0.25;
  solver.step_errors();
  solver.step_errors();
  CHECK((s.lam_err[0] - 2.0 * delta).norm() < 1e-14);
  CHECK(s.lam_err[1].norm() == 0.0);
  CHECK(s.xi(1) == doctest::Approx(0.5));
  CHECK(s.xi(0) == 0.0);
}

TEST_CASE("Gamma copies differ from the shared part only in their own row") {
  Rng rng(13);
  const Problem p{random_matrix(rng, 3, 2), 1.0};
  AdmmSolver solver(p, SolverOptions{}, 2);
  AdmmState& s = solver.state();
  s.f *= 3.0;  // every row infeasible
  solver.step_Gamma();
  for (int n = 0; n < 3; ++n) {
    const MatrixXcd g = s.gamma_copy(n);
    CHECK(per_element_power(g, n) == doctest::Approx(1.0));
    for (int m = 0; m < 3; ++m)
      if (m != n) CHECK((g.row(m) - s.f.row(m)).norm() < 1e-14);
  }
}

TEST_CASE("options validation") {
  SolverOptions o;
  o.rho = 0;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  SolverOptions e;
  e.epsilon = -1;
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);
  SolverOptions s;
  s.beta_step = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK_NOTHROW(SolverOptions::single_step().validate());
}

TEST_CASE("normalization preserves SINR") {
  Rng rng(14);
  const MatrixXcd h = random_matrix(rng, 4, 3, 1e-3);
  const MatrixXcd f = random_matrix(rng, 4, 3);
  const Problem p = Problem::normalized(h, 2e-3, 1e-8);
  CHECK(min_sinr(f, p.h, 1.0) ==
        doctest::Approx(min_sinr(f * std::sqrt(2e-3), h, 1e-8)).epsilon(1e-12));
}

TEST_CASE("solve returns a feasible beamformer with positive SINR") {
  const SystemConfig c;
  const ChannelSet ch = sample_channel(c, 1);
  const SolveResult r = solve(c, ch, SolverOptions{}, 1);
  CHECK(is_feasible(r.f, c.pt, 1e-9));
  CHECK(r.min_sinr > 0.0);
  CHECK(r.trace.converged);
  CHECK(r.trace.rows.size() <= 50);
  CHECK(r.min_sinr == doctest::Approx(min_sinr(r.f, ch.h, c.noise)));
  const TraceRow& last = r.trace.rows.back();
  CHECK(last.max_residual() < 1e-2);
  CHECK(last.min_sinr == doctest::Approx(r.min_sinr).epsilon(1e-9));
}

TEST_CASE("solve is deterministic") {
  const SystemConfig c;
  const ChannelSet ch = sample_channel(c, 4);
  const SolveResult a = solve(c, ch, SolverOptions{}, 4);
  const SolveResult b = solve(c, ch, SolverOptions{}, 4);
  CHECK(a.f == b.f);
  REQUIRE(a.trace.rows.size() == b.trace.rows.size());
  for (std::size_t i = 0; i < a.trace.rows.size(); ++i) {
    CHECK(a.trace.rows[i].gamma == b.trace.rows[i].gamma);
    CHECK(a.trace.rows[i].min_sinr == b.trace.rows[i].min_sinr);
  }
}

TEST_CASE("solve stops by the relative-change rule") {
  const SystemConfig c;
  const ChannelSet ch = sample_channel(c, 5);
  SolverOptions o;
  const SolveResult r = solve(c, ch, o, 5);
  REQUIRE(r.trace.rows.size() >= 2);
  const double g1 = r.trace.rows.back().gamma;
  const double g0 = r.trace.rows[r.trace.rows.size() - 2].gamma;
  CHECK(std::abs(g1 - g0) / std::abs(g0) < o.epsilon);
  CHECK(r.trace.stop_reason == "tolerance");
}

TEST_CASE("single-user solve is near the closed-form optimum") {
  SystemConfig c;
  c.nx = 4;
  c.nz = 2;
  c.users = 1;
  const ChannelSet ch = sample_channel(c, 2);
  const SolveResult r = solve(c, ch, SolverOptions{}, 2);
  const double opt = single_user_optimum(ch.h.col(0), c.pt, c.noise).value;
  CHECK(r.min_sinr >= 0.95 * opt);
  CHECK(r.min_sinr <= opt * (1 + 1e-9));
}

TEST_CASE("zero channel reports zero SINR immediately") {
  SystemConfig c;
  c.users = 2;
  ChannelSet ch = sample_channel(c, 3);
  ch.h.col(1).setZero();
  const SolveResult r = solve(c, ch, SolverOptions{}, 3);
  CHECK(r.trace.stop_reason == "zero channel");
  CHECK(r.trace.rows.empty());
  CHECK(r.min_sinr == 0.0);
  CHECK(is_feasible(r.f, c.pt, 1e-9));
}

TEST_CASE("invalid inputs are rejected") {
  const SystemConfig c;
  ChannelSet ch = sample_channel(c, 3);
  CHECK_THROWS_AS(solve(ch.h, c.pt, 0.0, SolverOptions{}, 1), std::invalid_argument);
  ch.h(0, 0) = cd(NAN, 0);
  CHECK_THROWS_AS(solve(ch.h, c.pt, c.noise, SolverOptions{}, 1), std::invalid_argument);
  SystemConfig small = c;
  small.users = 2;
  CHECK_THROWS_AS(solve(small, sample_channel(c, 1), SolverOptions{}, 1), std::invalid_argument);
}

TEST_CASE("paper-sign multipliers and single-step mode run to completion") {
  const SystemConfig c;
  const ChannelSet ch = sample_channel(c, 6);
  SolverOptions step = SolverOptions::single_step();
  step.max_restarts = 0;
  SolverOptions paper;
  paper.mode = MultiplierMode::paper;
  for (const SolverOptions& o : {step, paper}) {
    SolveResult r;
    try {
      r = solve(c, ch, o, 6);
    } catch (const SolverError& e) {
      // Divergence must name the offending update.
      CHECK(std::string(e.what()).find("non-finite value after update_") != std::string::npos);
      continue;
    }
    CHECK(is_feasible(r.f, c.pt, 1e-9));
    CHECK(r.trace.rows.size() <= static_cast<std::size_t>(o.max_iters));
  }
}
