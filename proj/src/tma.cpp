#include "tris/tma.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace tris::tma {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::complex<double> kJ{0.0, 1.0};

double wrap_phase(double phi) {
  double p = std::remainder(phi, 2.0 * kPi);  // [-pi, pi]
  if (p >= kPi) p -= 2.0 * kPi;
  return p;
}

// alpha(f, t, tau) with x = f * T_p.
std::complex<double> alpha_term(double f, double t, double tau, double period) {
  const double x = f * period;
  return (2.0 / (kPi * x)) * std::sin(kPi * f * tau) * std::exp(-kJ * (kPi * f * (2.0 * t + tau)));
}

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

// Measure of the +1 state inside [lo, hi).
double plus_measure(const TmaWaveform& w, double lo, double hi) {
  const double end = w.t_on + w.tau;
  if (end <= w.period) return overlap(lo, hi, w.t_on, end);
  const double wrap_end = end - w.period;
  return overlap(lo, hi, 0.0, wrap_end) + overlap(lo, hi, w.t_on, w.period);
}

}  // namespace

CompositeSymbol compose_symbol(const VectorXcd& f_row, const VectorXcd& s) {
  if (f_row.size() != s.size()) throw std::invalid_argument("compose_symbol: length mismatch");
  const std::complex<double> x = (f_row.transpose() * s)(0, 0);
  CompositeSymbol sym;
  const double scale = f_row.norm() * s.norm();
  if (std::abs(x) <= 1e-14 * scale) return sym;
  sym.amplitude = std::abs(x);
  sym.phase = wrap_phase(std::arg(x));
  sym.amplitude_max = sym.amplitude;
  return sym;
}

std::vector<std::vector<CompositeSymbol>> compose_frame(const MatrixXcd& f,
                                                        const MatrixXcd& symbols) {
  if (f.cols() != symbols.rows()) throw std::invalid_argument("compose_frame: K mismatch");
  std::vector<std::vector<CompositeSymbol>> out(f.rows());
  double a_max = 0.0;
  for (int n = 0; n < f.rows(); ++n) {
    out[n].reserve(symbols.cols());
    for (int t = 0; t < symbols.cols(); ++t) {
      out[n].push_back(compose_symbol(f.row(n).transpose(), symbols.col(t)));
      a_max = std::max(a_max, out[n].back().amplitude);
    }
  }
  for (auto& row : out)
    for (auto& sym : row) sym.amplitude_max = a_max;
  return out;
}

TmaWaveform map_to_waveform(const CompositeSymbol& sym, double period) {
  if (!(period > 0)) throw std::invalid_argument("map_to_waveform: period must be > 0");
  if (!(sym.amplitude_max > 0)) throw std::invalid_argument("map_to_waveform: A_max must be > 0");
  if (sym.amplitude < 0 || sym.amplitude > sym.amplitude_max * (1.0 + 1e-12))
    throw std::invalid_argument("map_to_waveform: amplitude outside [0, A_max]");
  TmaWaveform w;
  w.period = period;
  if (sym.amplitude == 0.0) return w;
  const double ratio = std::min(sym.amplitude / sym.amplitude_max, 1.0);
  w.tau = period / kPi * std::asin(ratio);
  const double x = -sym.phase / (2.0 * kPi) - w.tau / (2.0 * period);
  double frac = x - std::floor(x);
  if (frac >= 1.0) frac = 0.0;
  w.t_on = frac * period;
  return w;
}

double waveform_phase(double t, const TmaWaveform& w) {
  if (t < 0 || t >= w.period) throw std::invalid_argument("waveform_phase: t outside [0, T_p)");
  const double end = w.t_on + w.tau;
  if (end <= w.period) return (t > w.t_on && t <= end) ? 1.0 : -1.0;
  return (t > end - w.period && t <= w.t_on) ? -1.0 : 1.0;
}

std::complex<double> spectrum(double f, const TmaWaveform& w) {
  const double tp = w.period;
  if (f == 0.0) return (2.0 * w.tau - tp) / tp;
  const double x = f * tp;
  // At f = q / T_p the tail term 1 - e^{-j 2 pi q} vanishes and both branches
  // reduce to the harmonic peak.
  const double q = std::round(x);
  if (q != 0.0 && std::abs(x - q) <= 1e-12 * std::abs(q) && std::abs(q) < 1e9)
    return harmonic_peak(static_cast<int>(q), w);
  const std::complex<double> tail = std::exp(-kJ * (2.0 * kPi * x));
  if (w.t_on + w.tau <= tp)
    return alpha_term(f, w.t_on, w.tau, tp) + kJ * (1.0 - tail) / (2.0 * kPi * x);
  return alpha_term(f, w.t_on, w.tau - tp, tp) + kJ * (tail - 1.0) / (2.0 * kPi * x);
}

std::complex<double> harmonic_peak(int q, const TmaWaveform& w) {
  if (q == 0) throw std::invalid_argument("harmonic_peak: q must be nonzero");
  const double tp = w.period;
  return (2.0 / (kPi * q)) * std::sin(kPi * q * w.tau / tp) *
         std::exp(-kJ * (kPi * q * (2.0 * w.t_on + w.tau) / tp));
}

std::vector<std::complex<double>> sample_waveform(const TmaWaveform& w, int samples) {
  if (samples < kMinSamplesPerPeriod)
    throw std::invalid_argument("sample_waveform: fewer than 16 samples per period");
  std::vector<std::complex<double>> out(samples);
  const double dt = w.period / samples;
  for (int m = 0; m < samples; ++m) {
    const double lo = m * dt;
    const double hi = (m + 1 == samples) ? w.period : (m + 1) * dt;
    const double plus = plus_measure(w, lo, hi);
    out[m] = (2.0 * plus - (hi - lo)) / (hi - lo);
  }
  return out;
}

std::complex<double> demodulate_first_harmonic(const std::vector<std::complex<double>>& samples,
                                               double sample_rate) {
  const int m_count = static_cast<int>(samples.size());
  if (m_count < kMinSamplesPerPeriod)
    throw std::invalid_argument("demodulate_first_harmonic: fewer than 16 samples per period");
  if (!(sample_rate > 0)) throw std::invalid_argument("demodulate_first_harmonic: bad rate");
  const double f1 = sample_rate / m_count;  // 1 / T_p
  std::complex<double> acc = 0.0;
  for (int m = 0; m < m_count; ++m) {
    const double t_mid = (m + 0.5) / sample_rate;
    acc += samples[m] * std::exp(-kJ * (2.0 * kPi * f1 * t_mid));
  }
  const double half_bin = kPi / m_count;
  return acc / static_cast<double>(m_count) * (std::sin(half_bin) / half_bin);
}

void write_waveform_csv(std::ostream& os, const std::vector<TmaWaveform>& elements,
                        int samples_per_period) {
  if (samples_per_period < 1) throw std::invalid_argument("write_waveform_csv: no samples");
  os << "element,t_over_Tp,state\n";
  char buf[64];
  for (std::size_t e = 0; e < elements.size(); ++e) {
    for (int m = 0; m < samples_per_period; ++m) {
      const double frac = static_cast<double>(m) / samples_per_period;
      const double s = waveform_phase(frac * elements[e].period, elements[e]);
      std::snprintf(buf, sizeof buf, "%zu,%.6f,%d\n", e, frac, s > 0 ? 0 : 1);
      os << buf;
    }
  }
}

}  // namespace tris::tma
