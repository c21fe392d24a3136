#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gearcrack::signal {

struct NoisySignal {
  std::vector<double> data;
  double snr_db = 0.0;
  double achieved_snr_db = 0.0;
  std::uint64_t seed = 0;
};

// Power of x with its mean removed.
double ac_power(std::span<const double> x);

// Adds white Gaussian noise with variance ac_power(x) / 10^(snr_db / 10).
NoisySignal add_awgn(std::span<const double> x, double snr_db, std::uint64_t seed);

struct EnvelopeSpectrum {
  std::vector<double> freq_Hz;
  std::vector<double> magnitude;
};

// Single-sided amplitude spectrum of |analytic(x)| with its mean removed.
EnvelopeSpectrum envelope_spectrum(std::span<const double> x, double sample_rate_Hz);

// |analytic signal| via one-sided spectral doubling.
std::vector<double> envelope(std::span<const double> x);

}  // namespace gearcrack::signal
