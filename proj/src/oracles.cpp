#include "tris/oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "tris/rng.hpp"

namespace tris {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Uniform point on the probability simplex of dimension k.
void simplex_draw(Rng& rng, std::vector<double>& w) {
  double total = 0.0;
  for (double& x : w) {
    x = -std::log(1.0 - rng.uniform());
    total += x;
  }
  for (double& x : w) x /= total;
}

MatrixXcd random_feasible(Rng& rng, int n, int k, double pt) {
  MatrixXcd f(n, k);
  std::vector<double> w(k);
  for (int i = 0; i < n; ++i) {
    simplex_draw(rng, w);
    for (int j = 0; j < k; ++j) f(i, j) = std::polar(std::sqrt(pt * w[j]), kTwoPi * rng.uniform());
  }
  return f;
}

// All ways to split `total` units into `parts` nonnegative integers.
void compositions(int total, int parts, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int i = 0; i <= total; ++i) {
    cur.push_back(i);
    compositions(total - i, parts - 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

OracleResult single_user_optimum(const VectorXcd& h, double pt, double noise) {
  if (!(noise > 0)) throw std::invalid_argument("single_user_optimum: noise must be > 0");
  OracleResult r;
  r.f_best.resize(h.size(), 1);
  for (int n = 0; n < h.size(); ++n) r.f_best(n, 0) = std::polar(std::sqrt(pt), std::arg(h(n)));
  const double s = h.cwiseAbs().sum();
  r.value = pt * s * s / noise;
  r.evaluations = 1;
  return r;
}

OracleResult random_search(const MatrixXcd& h, double pt, double noise, long long budget,
                           std::uint64_t seed) {
  if (budget < 0) throw std::invalid_argument("random_search: budget must be >= 0");
  const int n = static_cast<int>(h.rows());
  const int k = static_cast<int>(h.cols());
  Rng rng(derive_seed(seed, 11));
  OracleResult best;
  best.f_best = random_feasible(rng, n, k, pt);
  best.value = min_sinr(best.f_best, h, noise);
  best.evaluations = 1;
  for (long long b = 0; b < budget; ++b) {
    MatrixXcd f = random_feasible(rng, n, k, pt);
    const double v = min_sinr(f, h, noise);
    ++best.evaluations;
    if (v > best.value) {
      best.value = v;
      best.f_best = std::move(f);
    }
  }
  return best;
}

OracleResult random_search(const SystemConfig& cfg, const ChannelSet& ch, long long budget,
                           std::uint64_t seed) {
  return random_search(ch.h, cfg.pt, cfg.noise, budget, seed);
}

MatrixXcd finite_difference_gradient(const RealFunction& f, const MatrixXcd& x, double step) {
  const double h = step > 0 ? step : 1e-5 * (1.0 + x.norm());
  MatrixXcd g(x.rows(), x.cols());
  MatrixXcd p = x;
  auto eval = [&](const MatrixXcd& m) {
    const double v = f(m);
    if (!std::isfinite(v)) throw std::domain_error("finite_difference_gradient: non-finite f");
    return v;
  };
  for (int j = 0; j < x.cols(); ++j) {
    for (int i = 0; i < x.rows(); ++i) {
      const cd x0 = x(i, j);
      p(i, j) = x0 + h;
      const double re_plus = eval(p);
      p(i, j) = x0 - h;
      const double re_minus = eval(p);
      p(i, j) = x0 + cd(0.0, h);
      const double im_plus = eval(p);
      p(i, j) = x0 - cd(0.0, h);
      const double im_minus = eval(p);
      p(i, j) = x0;
      const double d_re = (re_plus - re_minus) / (2.0 * h);
      const double d_im = (im_plus - im_minus) / (2.0 * h);
      g(i, j) = cd(0.5 * d_re, -0.5 * d_im);
    }
  }
  return g;
}

OracleResult grid_search(const MatrixXcd& h, double pt, double noise, int density) {
  const int n = static_cast<int>(h.rows());
  const int k = static_cast<int>(h.cols());
  if (n * k > 4) throw std::invalid_argument("grid_search: instance too large (N*K > 4)");
  if (density < 2) throw std::invalid_argument("grid_search: density must be >= 2");
  if (!(noise > 0)) throw std::invalid_argument("grid_search: noise must be > 0");

  std::vector<std::vector<int>> splits;
  std::vector<int> cur;
  compositions(density - 1, k, cur, splits);
  std::vector<double> phase_cos(density), phase_sin(density);
  for (int p = 0; p < density; ++p) {
    phase_cos[p] = std::cos(kTwoPi * p / density);
    phase_sin[p] = std::sin(kTwoPi * p / density);
  }

  // Free coordinates: one split per row, one phase per entry outside row 0.
  const int n_phase = (n - 1) * k;
  std::vector<int> split_idx(n, 0), phase_idx(n_phase, 0);
  MatrixXcd f(n, k);
  OracleResult best;
  best.value = -1.0;
  const MatrixXcd hc = h.adjoint();  // row k is h_k^H
  for (;;) {
    for (int i = 0; i < n; ++i) {
      const std::vector<int>& s = splits[split_idx[i]];
      for (int j = 0; j < k; ++j) {
        const double mag = std::sqrt(pt * s[j] / (density - 1));
        if (i == 0) {
          f(i, j) = mag;
        } else {
          const int p = phase_idx[(i - 1) * k + j];
          f(i, j) = cd(mag * phase_cos[p], mag * phase_sin[p]);
        }
      }
    }
    double worst = std::numeric_limits<double>::infinity();
    for (int u = 0; u < k && worst > best.value; ++u) {
      double sig = 0.0, interf = 0.0;
      for (int c = 0; c < k; ++c) {
        cd acc = 0.0;
        for (int i = 0; i < n; ++i) acc += hc(u, i) * f(i, c);
        (c == u ? sig : interf) += std::norm(acc);
      }
      worst = std::min(worst, sig / (interf + noise));
    }
    ++best.evaluations;
    if (worst > best.value) {
      best.value = worst;
      best.f_best = f;
    }
    // Odometer over phases, then splits.
    int d = 0;
    for (; d < n_phase; ++d) {
      if (++phase_idx[d] < density) break;
      phase_idx[d] = 0;
    }
    if (d < n_phase) continue;
    int r = 0;
    for (; r < n; ++r) {
      if (++split_idx[r] < static_cast<int>(splits.size())) break;
      split_idx[r] = 0;
    }
    if (r == n) break;
  }
  return best;
}

bool small_instance_certificate(const MatrixXcd& h, double pt, double noise,
                                const MatrixXcd& candidate, int density) {
  if (candidate.rows() != h.rows() || candidate.cols() != h.cols())
    throw std::invalid_argument("small_instance_certificate: candidate shape mismatch");
  const OracleResult grid = grid_search(h, pt, noise, density);
  if (!is_feasible(candidate, pt, 1e-9)) return false;
  const double cand = min_sinr(candidate, h, noise);
  return grid.value <= 1.02 * cand;
}

bool small_instance_certificate(const SystemConfig& cfg, const ChannelSet& ch,
                                const MatrixXcd& candidate, int density) {
  return small_instance_certificate(ch.h, cfg.pt, cfg.noise, candidate, density);
}

}  // namespace tris
