#include "gearcrack/vmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "gearcrack/error.hpp"
#include "gearcrack/fft.hpp"

namespace gearcrack::vmd {
namespace {

using cplx = std::complex<double>;

double centroid(const std::vector<cplx>& u, const std::vector<double>& freq, double fallback) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t b = 0; b < u.size(); ++b) {
    const double p = std::norm(u[b]);
    num += freq[b] * p;
    den += p;
  }
  return den > 0.0 ? num / den : fallback;
}

std::vector<double> initial_omegas(const VmdConfig& cfg, std::size_t T) {
  std::vector<double> omega(cfg.K, 0.0);
  switch (cfg.init) {
    case Init::uniform:
      // Spread over (0, Nyquist / 2) in normalized frequency.
      for (int k = 0; k < cfg.K; ++k) omega[k] = 0.25 * (k + 0.5) / cfg.K;
      break;
    case Init::random: {
      std::mt19937_64 rng(cfg.seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      const double lo = std::log(1.0 / static_cast<double>(T));
      const double hi = std::log(0.5);
      for (int k = 0; k < cfg.K; ++k) omega[k] = std::exp(lo + (hi - lo) * u(rng));
      std::sort(omega.begin(), omega.end());
      break;
    }
    case Init::zeros:
      break;
  }
  if (cfg.dc_mode) omega[0] = 0.0;
  return omega;
}

}  // namespace

void VmdConfig::validate() const {
  if (K < 1) throw DomainError("VMD needs K >= 1");
  if (!(alpha > 0.0)) throw DomainError("VMD alpha must be positive");
  if (!(tau >= 0.0)) throw DomainError("VMD tau must be non-negative");
  if (!(eps > 0.0)) throw DomainError("VMD eps must be positive");
  if (max_iters < 1) throw DomainError("VMD max_iters must be >= 1");
}

std::vector<double> mirror_extend(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw DomainError("mirror_extend needs at least 2 samples");
  const std::size_t left = n / 2;
  const std::size_t right = n - left;
  std::vector<double> out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < left; ++i) out.push_back(x[left - 1 - i]);
  out.insert(out.end(), x.begin(), x.end());
  for (std::size_t i = 0; i < right; ++i) out.push_back(x[n - 1 - i]);
  return out;
}

std::vector<double> mirror_crop(std::span<const double> extended, std::size_t n) {
  if (extended.size() != 2 * n) throw DomainError("mirror_crop: length mismatch");
  const std::size_t left = n / 2;
  return {extended.begin() + static_cast<std::ptrdiff_t>(left),
          extended.begin() + static_cast<std::ptrdiff_t>(left + n)};
}

double HalfSpectrum::energy() const {
  if (n == 0) return 0.0;
  double e = std::norm(bins.front());
  const std::size_t last = bins.size() - 1;
  for (std::size_t k = 1; k < bins.size(); ++k) {
    const bool nyquist = (n % 2 == 0) && k == last;
    e += (nyquist ? 1.0 : 2.0) * std::norm(bins[k]);
  }
  return e / static_cast<double>(n);
}

HalfSpectrum spectrum(std::span<const double> signal) {
  for (double v : signal) {
    if (!std::isfinite(v)) throw DomainError("spectrum: non-finite sample");
  }
  return {fft::rfft(signal), signal.size()};
}

std::vector<double> inverse_spectrum(const HalfSpectrum& half) {
  return fft::irfft(half.bins, half.n);
}

VmdResult vmd(std::span<const double> signal, double fs, const VmdConfig& cfg) {
  cfg.validate();
  const std::size_t n = signal.size();
  if (n < static_cast<std::size_t>(2 * cfg.K)) throw DomainError("VMD signal shorter than 2K");
  if (!(fs > 0.0)) throw DomainError("sample rate must be positive");
  bool any = false;
  for (double v : signal) {
    if (!std::isfinite(v)) throw DomainError("VMD input contains non-finite samples");
    any = any || v != 0.0;
  }
  if (!any) throw DomainError("VMD input is all zero; center frequencies are undefined");

  const std::vector<double> ext = mirror_extend(signal);
  const std::size_t T = ext.size();
  const std::vector<cplx> full = fft::rfft(ext);
  // Positive half without the Nyquist bin.
  const std::size_t B = T / 2;
  const std::vector<cplx> f(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(B));
  std::vector<double> freq(B);
  for (std::size_t b = 0; b < B; ++b) freq[b] = static_cast<double>(b) / static_cast<double>(T);

  const int K = cfg.K;
  std::vector<std::vector<cplx>> u(K, std::vector<cplx>(B, cplx{}));
  std::vector<cplx> sum_all(B, cplx{});
  std::vector<cplx> lambda(B, cplx{});
  std::vector<double> omega = initial_omegas(cfg, T);
  const double two_alpha = 2.0 * cfg.alpha;

  VmdResult res;
  double update = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < cfg.max_iters) {
    update = 0.0;
    for (int k = 0; k < K; ++k) {
      std::vector<cplx>& uk = u[k];
      double diff = 0.0;
      double prev = 0.0;
      const double wk = omega[k];
      for (std::size_t b = 0; b < B; ++b) {
        // Modes i < k already hold this sweep's values, i > k the previous ones.
        const cplx others = sum_all[b] - uk[b];
        const double dw = freq[b] - wk;
        const cplx next = (f[b] - others + 0.5 * lambda[b]) / (1.0 + two_alpha * dw * dw);
        diff += std::norm(next - uk[b]);
        prev += std::norm(uk[b]);
        sum_all[b] = others + next;
        uk[b] = next;
      }
      if (!(cfg.dc_mode && k == 0)) omega[k] = centroid(uk, freq, omega[k]);
      if (prev > 0.0) {
        update += diff / prev;
      } else if (diff > 0.0) {
        update = std::numeric_limits<double>::infinity();
      }
    }
    if (cfg.tau > 0.0) {
      for (std::size_t b = 0; b < B; ++b) lambda[b] += cfg.tau * (f[b] - sum_all[b]);
    }
    ++it;
    if (update < cfg.eps) break;
  }
  res.iterations = it;
  res.final_update_norm = update;
  res.converged = update < cfg.eps;

  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return omega[a] < omega[b]; });

  res.residual.assign(signal.begin(), signal.end());
  for (int idx : order) {
    std::vector<cplx> bins(T / 2 + 1, cplx{});
    std::copy(u[idx].begin(), u[idx].end(), bins.begin());
    std::vector<double> mode = mirror_crop(fft::irfft(bins, T), n);
    for (std::size_t i = 0; i < n; ++i) res.residual[i] -= mode[i];
    res.modes.push_back(std::move(mode));
    res.center_freqs_Hz.push_back(omega[idx] * fs);
  }
  return res;
}

}  // namespace gearcrack::vmd
