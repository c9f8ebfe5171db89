#pragma once

#include <cstdint>
#include <functional>

#include "tris/system_model.hpp"

namespace tris {

struct OracleResult {
  MatrixXcd f_best;
  double value = 0.0;  // min-SINR of f_best
  long long evaluations = 0;
};

/// Phase-aligned full-power beamformer for one user.
OracleResult single_user_optimum(const VectorXcd& h, double pt, double noise);

/// Best of the initial draw plus `budget` further random feasible draws
/// (rows at full power, uniform phases, uniform split of row power).
OracleResult random_search(const MatrixXcd& h, double pt, double noise, long long budget,
                           std::uint64_t seed);
OracleResult random_search(const SystemConfig& cfg, const ChannelSet& ch, long long budget,
                           std::uint64_t seed);

using RealFunction = std::function<double(const MatrixXcd&)>;

/// Central differences in the real and imaginary part of every entry,
/// returned as (d/dRe - j d/dIm) / 2. step <= 0 selects 1e-5 * (1 + ||X||_F).
MatrixXcd finite_difference_gradient(const RealFunction& f, const MatrixXcd& x, double step = 0.0);

/// Best point of the grid used by small_instance_certificate.
OracleResult grid_search(const MatrixXcd& h, double pt, double noise, int density);

/// True iff no grid point beats the candidate's min-SINR by more than 2%.
/// Throws std::invalid_argument when N * K > 4.
bool small_instance_certificate(const MatrixXcd& h, double pt, double noise,
                                const MatrixXcd& candidate, int density);
bool small_instance_certificate(const SystemConfig& cfg, const ChannelSet& ch,
                                const MatrixXcd& candidate, int density);

}  // namespace tris
