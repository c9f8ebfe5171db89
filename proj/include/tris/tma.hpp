#pragma once

#include <complex>
#include <ostream>
#include <vector>

#include "tris/system_model.hpp"

namespace tris::tma {

inline constexpr double kDefaultPeriod = 0.3e-6;
inline constexpr int kMinSamplesPerPeriod = 16;

struct CompositeSymbol {
  double amplitude = 0.0;
  double phase = 0.0;  // [-pi, pi)
  double amplitude_max = 0.0;
};

struct TmaWaveform {
  double t_on = 0.0;
  double tau = 0.0;
  double period = kDefaultPeriod;
};

/// x_n = F_row . s; amplitude_max is set to |x_n| (single-symbol frame).
CompositeSymbol compose_symbol(const VectorXcd& f_row, const VectorXcd& s);

/// Composite symbols of every element (rows) over every symbol slot (columns
/// of `symbols`, K x T), normalized by the frame maximum.
std::vector<std::vector<CompositeSymbol>> compose_frame(const MatrixXcd& f,
                                                        const MatrixXcd& symbols);

TmaWaveform map_to_waveform(const CompositeSymbol& sym, double period = kDefaultPeriod);

/// +1 for the e^{j0} state, -1 for the e^{j pi} state.
double waveform_phase(double t, const TmaWaveform& w);

/// Normalized transform (1/T_p) * integral over one period of s(t) e^{-j 2 pi f t}.
std::complex<double> spectrum(double f, const TmaWaveform& w);

std::complex<double> harmonic_peak(int q, const TmaWaveform& w);

/// Integrate-and-dump samples: each entry is the mean of s(t) over its
/// 1/M slice of the period.
std::vector<std::complex<double>> sample_waveform(const TmaWaveform& w, int samples);

/// First-harmonic coefficient of one period of samples, scaled so that
/// sample_waveform output maps to harmonic_peak(1, .).
std::complex<double> demodulate_first_harmonic(const std::vector<std::complex<double>>& samples,
                                               double sample_rate);

/// CSV with columns element,t_over_Tp,state (0 for e^{j0}, 1 for e^{j pi}).
void write_waveform_csv(std::ostream& os, const std::vector<TmaWaveform>& elements,
                        int samples_per_period);

}  // namespace tris::tma
