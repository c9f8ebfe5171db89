#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

namespace tris {

using cd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Physical-layer parameters. Indices elsewhere in the library are 0-based.
struct SystemConfig {
  int nx = 4;
  int nz = 4;
  int users = 5;
  double spacing = 0.05;     // element spacing d (m)
  double wavelength = 0.1;   // carrier wavelength (m)
  double pt = 1e-3;          // per-element max power (W)
  double noise = 1e-8;       // per-user noise power (W)
  double beta = 1e-2;        // path gain at d0 (linear)
  double alpha = 3.0;        // path-loss exponent
  double kappa = 1.9952623149688795;  // Rician factor (linear), 3 dB
  double d0 = 1.0;
  double disk_radius = 50.0;
  double height = 15.0;

  int elements() const { return nx * nz; }
  /// Throws std::invalid_argument naming the first violated field.
  void validate() const;
};

struct ChannelSet {
  MatrixXcd h;                 // N x K, column k is h_k
  std::vector<double> dist;    // d_k (m)
  std::vector<double> theta;   // AoD from the array normal
  std::vector<double> phi;     // AoD azimuth

  int elements() const { return static_cast<int>(h.rows()); }
  int users() const { return static_cast<int>(h.cols()); }
  /// K stacked copies of h_k (length N*K).
  VectorXcd stacked(int k) const;
};

VectorXcd steering_vector(double theta, double phi, const SystemConfig& cfg);

/// Users drawn uniformly in the disk, AoDs from geometry, Rician fading.
ChannelSet sample_channel(const SystemConfig& cfg, std::uint64_t seed);

/// Rician channel for users at given distances and angles.
ChannelSet rician_channel(const SystemConfig& cfg, const std::vector<double>& dist,
                          const std::vector<double>& theta, const std::vector<double>& phi,
                          std::uint64_t seed);

double path_gain(const SystemConfig& cfg, double dist);

VectorXd index_vector_a(int k, int n_elements, int n_users);
VectorXd index_vector_b(int n, int n_elements, int n_users);

/// Column-major vec.
VectorXcd vec(const MatrixXcd& x);
MatrixXcd hadamard(const MatrixXcd& a, const MatrixXcd& x);

double sinr(const MatrixXcd& f, const MatrixXcd& h, int k, double noise);
VectorXd sinr_all(const MatrixXcd& f, const MatrixXcd& h, double noise);
double min_sinr(const MatrixXcd& f, const MatrixXcd& h, double noise);

double per_element_power(const MatrixXcd& f, int n);
bool is_feasible(const MatrixXcd& f, double pt, double rel_tol = 1e-12);

struct PilotBatch {
  MatrixXcd pilots;   // L x K, column k is s_k
  VectorXcd y;        // received L-vector of the target user
  MatrixXcd r_h;      // N x N
  MatrixXcd r_w;      // L x L
  int user = 0;
};

/// Unit-modulus DFT sequences, mutually orthogonal when length >= users.
MatrixXcd orthogonal_pilots(int users, int length);

MatrixXcd rician_covariance(const SystemConfig& cfg, const ChannelSet& ch, int k);

MatrixXcd interference_covariance(const MatrixXcd& pilots, const MatrixXcd& f,
                                  const MatrixXcd& r_h, int k, double noise);

/// Filter mapping y_k to the channel estimate (N x L).
MatrixXcd mmse_filter(const MatrixXcd& r_h, const VectorXcd& f_k, const VectorXcd& s_k,
                      const MatrixXcd& r_w);

VectorXcd mmse_estimate(const PilotBatch& batch, const VectorXcd& f_k);

/// Draws y_k = s_k f_k^H h_k + w_k with w_k ~ CN(0, R_w).
PilotBatch simulate_pilots(const MatrixXcd& pilots, const MatrixXcd& f, const VectorXcd& h_k,
                           const MatrixXcd& r_h, int k, double noise, std::uint64_t seed);

double db_to_linear(double db);
double linear_to_db(double x);
double dbm_to_watt(double dbm);

}  // namespace tris
