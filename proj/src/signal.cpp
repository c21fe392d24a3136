#include "gearcrack/signal.hpp"

#include <cmath>
#include <random>

#include "gearcrack/error.hpp"
#include "gearcrack/fft.hpp"

namespace gearcrack::signal {

double ac_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double p = 0.0;
  for (double v : x) p += (v - mean) * (v - mean);
  return p / static_cast<double>(x.size());
}

NoisySignal add_awgn(std::span<const double> x, double snr_db, std::uint64_t seed) {
  const double p_signal = ac_power(x);
  if (!(p_signal > 0.0)) throw DomainError("cannot set an SNR on a zero-power signal");
  const double sigma = std::sqrt(p_signal / std::pow(10.0, snr_db / 10.0));

  NoisySignal out;
  out.snr_db = snr_db;
  out.seed = seed;
  out.data.resize(x.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  std::vector<double> noise(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    noise[i] = gauss(rng);
    out.data[i] = x[i] + noise[i];
  }
  out.achieved_snr_db = 10.0 * std::log10(p_signal / ac_power(noise));
  return out;
}

std::vector<double> envelope(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<fft::cplx> z(x.begin(), x.end());
  std::vector<fft::cplx> X = fft::fft(z);
  // Keep DC (and Nyquist for even n), double positive bins, drop negatives.
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    if (k < (n + 1) / 2) {
      X[k] *= 2.0;
    } else if (!(n % 2 == 0 && k == half)) {
      X[k] = 0.0;
    }
  }
  const std::vector<fft::cplx> analytic = fft::ifft(X);
  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(analytic[i]);
  return env;
}

EnvelopeSpectrum envelope_spectrum(std::span<const double> x, double fs) {
  if (x.size() < 16) throw DomainError("envelope spectrum needs at least 16 samples");
  if (!(fs > 0.0)) throw DomainError("sample rate must be positive");
  std::vector<double> env = envelope(x);
  const std::size_t n = env.size();
  double mean = 0.0;
  for (double v : env) mean += v;
  mean /= static_cast<double>(n);
  for (double& v : env) v -= mean;

  const std::vector<fft::cplx> bins = fft::rfft(env);
  EnvelopeSpectrum out;
  out.freq_Hz.resize(bins.size());
  out.magnitude.resize(bins.size());
  for (std::size_t k = 0; k < bins.size(); ++k) {
    out.freq_Hz[k] = static_cast<double>(k) * fs / static_cast<double>(n);
    const bool edge = k == 0 || (n % 2 == 0 && k == bins.size() - 1);
    out.magnitude[k] = (edge ? 1.0 : 2.0) * std::abs(bins[k]) / static_cast<double>(n);
  }
  return out;
}

}  // namespace gearcrack::signal
