#include "tris/system_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "tris/rng.hpp"

namespace tris {

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw std::invalid_argument(std::string(field) + ": " + what);
}

}  // namespace

void SystemConfig::validate() const {
  require(nx >= 1, "nx", "must be >= 1");
  require(nz >= 1, "nz", "must be >= 1");
  require(users >= 1, "users", "must be >= 1");
  require(spacing > 0, "spacing", "must be > 0");
  require(wavelength > 0, "wavelength", "must be > 0");
  require(pt > 0, "pt", "must be > 0");
  require(noise > 0, "noise", "must be > 0");
  require(beta > 0, "beta", "must be > 0");
  require(std::isfinite(alpha), "alpha", "must be finite");
  require(kappa >= 0, "kappa", "must be >= 0");
  require(d0 > 0, "d0", "must be > 0");
  require(disk_radius >= 0, "disk_radius", "must be >= 0");
  require(height > 0, "height", "must be > 0");
}

VectorXcd ChannelSet::stacked(int k) const {
  const int n = elements();
  const int kk = users();
  VectorXcd out(n * kk);
  for (int i = 0; i < kk; ++i) out.segment(i * n, n) = h.col(k);
  return out;
}

VectorXcd steering_vector(double theta, double phi, const SystemConfig& cfg) {
  const double kd = 2.0 * std::numbers::pi / cfg.wavelength * cfg.spacing;
  const double ux = std::sin(theta) * std::cos(phi);
  const double uz = std::sin(theta) * std::sin(phi);
  VectorXcd a(cfg.nx * cfg.nz);
  for (int ix = 0; ix < cfg.nx; ++ix) {
    for (int iz = 0; iz < cfg.nz; ++iz) {
      a(ix * cfg.nz + iz) = std::polar(1.0, -kd * (ix * ux + iz * uz));
    }
  }
  return a;
}

double path_gain(const SystemConfig& cfg, double dist) {
  return cfg.beta * std::pow(dist / cfg.d0, -cfg.alpha);
}

ChannelSet rician_channel(const SystemConfig& cfg, const std::vector<double>& dist,
                          const std::vector<double>& theta, const std::vector<double>& phi,
                          std::uint64_t seed) {
  cfg.validate();
  const int k_users = static_cast<int>(dist.size());
  if (theta.size() != dist.size() || phi.size() != dist.size())
    throw std::invalid_argument("rician_channel: geometry vectors differ in length");
  const int n = cfg.elements();
  Rng rng(derive_seed(seed, 1));
  ChannelSet ch;
  ch.h.resize(n, k_users);
  ch.dist = dist;
  ch.theta = theta;
  ch.phi = phi;
  const double w_los = std::sqrt(cfg.kappa / (cfg.kappa + 1.0));
  const double w_nlos = std::sqrt(1.0 / (cfg.kappa + 1.0));
  for (int k = 0; k < k_users; ++k) {
    const VectorXcd los = steering_vector(theta[k], phi[k], cfg);
    const double amp = std::sqrt(path_gain(cfg, dist[k]));
    for (int i = 0; i < n; ++i) {
      ch.h(i, k) = amp * (w_los * los(i) + w_nlos * rng.complex_normal());
    }
  }
  return ch;
}

ChannelSet sample_channel(const SystemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(derive_seed(seed, 0));
  std::vector<double> dist(cfg.users), theta(cfg.users), phi(cfg.users);
  for (int k = 0; k < cfg.users; ++k) {
    const double r = cfg.disk_radius * std::sqrt(rng.uniform());
    const double ang = 2.0 * std::numbers::pi * rng.uniform();
    const double x = r * std::cos(ang);
    const double y = r * std::sin(ang);
    dist[k] = std::hypot(r, cfg.height);
    theta[k] = std::acos(cfg.height / dist[k]);
    phi[k] = std::atan2(y, x);
  }
  return rician_channel(cfg, dist, theta, phi, seed);
}

VectorXd index_vector_a(int k, int n_elements, int n_users) {
  if (k < 0 || k >= n_users) throw std::out_of_range("index_vector_a: user index out of range");
  VectorXd a = VectorXd::Zero(n_elements * n_users);
  a.segment(k * n_elements, n_elements).setOnes();
  return a;
}

VectorXd index_vector_b(int n, int n_elements, int n_users) {
  if (n < 0 || n >= n_elements)
    throw std::out_of_range("index_vector_b: element index out of range");
  VectorXd b = VectorXd::Zero(n_elements * n_users);
  for (int k = 0; k < n_users; ++k) b(n + k * n_elements) = 1.0;
  return b;
}

VectorXcd vec(const MatrixXcd& x) {
  return Eigen::Map<const VectorXcd>(x.data(), x.size());
}

MatrixXcd hadamard(const MatrixXcd& a, const MatrixXcd& x) { return a.cwiseProduct(x); }

double sinr(const MatrixXcd& f, const MatrixXcd& h, int k, double noise) {
  if (noise <= 0) throw std::invalid_argument("sinr: noise must be > 0");
  const VectorXcd c = h.col(k).adjoint() * f;  // c(i) = h_k^H f_i
  const double sig = std::norm(c(k));
  const double interf = c.squaredNorm() - sig;
  return sig / (std::max(interf, 0.0) + noise);
}

VectorXd sinr_all(const MatrixXcd& f, const MatrixXcd& h, double noise) {
  if (noise <= 0) throw std::invalid_argument("sinr: noise must be > 0");
  const MatrixXcd c = h.adjoint() * f;  // c(k, i) = h_k^H f_i
  VectorXd out(h.cols());
  for (int k = 0; k < h.cols(); ++k) {
    const double sig = std::norm(c(k, k));
    const double interf = c.row(k).squaredNorm() - sig;
    out(k) = sig / (std::max(interf, 0.0) + noise);
  }
  return out;
}

double min_sinr(const MatrixXcd& f, const MatrixXcd& h, double noise) {
  return sinr_all(f, h, noise).minCoeff();
}

double per_element_power(const MatrixXcd& f, int n) {
  if (n < 0 || n >= f.rows()) throw std::out_of_range("per_element_power: row out of range");
  return f.row(n).squaredNorm();
}

bool is_feasible(const MatrixXcd& f, double pt, double rel_tol) {
  for (int n = 0; n < f.rows(); ++n)
    if (f.row(n).squaredNorm() > pt * (1.0 + rel_tol)) return false;
  return true;
}

MatrixXcd orthogonal_pilots(int users, int length) {
  if (users < 1 || length < 1) throw std::invalid_argument("orthogonal_pilots: empty size");
  MatrixXcd s(length, users);
  for (int k = 0; k < users; ++k)
    for (int l = 0; l < length; ++l)
      s(l, k) = std::polar(1.0, -2.0 * std::numbers::pi * l * k / length);
  return s;
}

MatrixXcd rician_covariance(const SystemConfig& cfg, const ChannelSet& ch, int k) {
  const VectorXcd los = steering_vector(ch.theta[k], ch.phi[k], cfg);
  const int n = cfg.elements();
  const double g = path_gain(cfg, ch.dist[k]);
  return g * (cfg.kappa / (cfg.kappa + 1.0) * (los * los.adjoint()) +
              1.0 / (cfg.kappa + 1.0) * MatrixXcd::Identity(n, n));
}

MatrixXcd interference_covariance(const MatrixXcd& pilots, const MatrixXcd& f,
                                  const MatrixXcd& r_h, int k, double noise) {
  const int l = static_cast<int>(pilots.rows());
  MatrixXcd r_w = noise * MatrixXcd::Identity(l, l);
  for (int i = 0; i < f.cols(); ++i) {
    if (i == k) continue;
    const cd q = (f.col(i).adjoint() * r_h * f.col(i))(0, 0);
    r_w += q * (pilots.col(i) * pilots.col(i).adjoint());
  }
  return r_w;
}

MatrixXcd mmse_filter(const MatrixXcd& r_h, const VectorXcd& f_k, const VectorXcd& s_k,
                      const MatrixXcd& r_w) {
  const MatrixXcd a = s_k * f_k.adjoint();  // L x N
  const MatrixXcd m = a * r_h * a.adjoint() + r_w;
  Eigen::FullPivLU<MatrixXcd> lu(m);
  if (!lu.isInvertible()) throw std::runtime_error("mmse_filter: singular bracketed matrix");
  // Xi = R_h A^H M^{-1}  <=>  Xi^H = M^{-H} A R_h, with M Hermitian.
  const MatrixXcd rhs = a * r_h;
  return lu.solve(rhs).adjoint();
}

VectorXcd mmse_estimate(const PilotBatch& batch, const VectorXcd& f_k) {
  const MatrixXcd xi = mmse_filter(batch.r_h, f_k, batch.pilots.col(batch.user), batch.r_w);
  return xi * batch.y;
}

PilotBatch simulate_pilots(const MatrixXcd& pilots, const MatrixXcd& f, const VectorXcd& h_k,
                           const MatrixXcd& r_h, int k, double noise, std::uint64_t seed) {
  PilotBatch b;
  b.pilots = pilots;
  b.r_h = r_h;
  b.user = k;
  b.r_w = interference_covariance(pilots, f, r_h, k, noise);
  const int l = static_cast<int>(pilots.rows());
  Eigen::LLT<MatrixXcd> llt(b.r_w);
  if (llt.info() != Eigen::Success) throw std::runtime_error("simulate_pilots: R_w not PD");
  Rng rng(seed);
  VectorXcd z(l);
  for (int i = 0; i < l; ++i) z(i) = rng.complex_normal();
  const cd gain = (f.col(k).adjoint() * h_k)(0, 0);
  b.y = pilots.col(k) * gain + llt.matrixL() * z;
  return b;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double x) { return 10.0 * std::log10(x); }
double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace tris
