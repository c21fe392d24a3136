#pragma once

// Time-synchronous averaging over whole shaft revolutions.

#include <span>
#include <vector>

#include "gearcrack/vmd.hpp"

namespace gearcrack::tsa {

struct TsaResult {
  std::vector<double> averaged;   // one revolution, V samples
  std::size_t n_averages = 0;     // L
  std::size_t period_samples = 0;  // V
  double residual_rms = 0.0;      // RMS of signal minus the tiled average over L*V samples
  // Accumulated misalignment after L revolutions caused by rounding the
  // exact period fs / f_shaft to V samples.
  double drift_samples = 0.0;
  bool drift_warning = false;     // drift_samples > 0.5
};

// averaged[i] = (1/L) sum_{n<L} signal[i + n V], V = round(fs / f_shaft),
// L = floor(len / V).
TsaResult tsa(std::span<const double> signal, double sample_rate_Hz, double shaft_freq_Hz);

std::vector<TsaResult> tsa_bank(const vmd::VmdResult& decomposition, double sample_rate_Hz,
                                double shaft_freq_Hz);

}  // namespace gearcrack::tsa
