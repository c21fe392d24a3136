#pragma once

// Variational mode decomposition solved by ADMM in the frequency domain.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace gearcrack::vmd {

enum class Init { uniform, random, zeros };

struct VmdConfig {
  int K = 5;
  double alpha = 2000.0;  // bandwidth penalty
  double tau = 0.0;       // dual ascent step; 0 lets the modes absorb noise
  double eps = 1e-6;      // stopping threshold on the relative mode update
  int max_iters = 500;
  bool dc_mode = false;   // pin the first mode at 0 Hz
  Init init = Init::uniform;
  std::uint64_t seed = 0;  // used by Init::random

  void validate() const;
};

struct VmdResult {
  std::vector<std::vector<double>> modes;  // ascending center frequency
  std::vector<double> center_freqs_Hz;
  std::vector<double> residual;
  int iterations = 0;
  double final_update_norm = 0.0;
  bool converged = false;  // false when max_iters was reached first
};

VmdResult vmd(std::span<const double> signal, double sample_rate_Hz, const VmdConfig& config);

// Half-length reflection on each side; the result has twice the length.
std::vector<double> mirror_extend(std::span<const double> signal);
// Inverse of mirror_extend for an original length n.
std::vector<double> mirror_crop(std::span<const double> extended, std::size_t n);

// One-sided spectrum of a real signal (bins 0 .. n/2).
struct HalfSpectrum {
  std::vector<std::complex<double>> bins;
  std::size_t n = 0;

  // sum |x|^2 recovered from the one-sided bins.
  double energy() const;
};

HalfSpectrum spectrum(std::span<const double> signal);
std::vector<double> inverse_spectrum(const HalfSpectrum& half);

}  // namespace gearcrack::vmd
