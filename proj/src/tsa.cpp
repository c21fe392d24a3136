#include "gearcrack/tsa.hpp"

#include <cmath>

#include "gearcrack/error.hpp"

namespace gearcrack::tsa {

TsaResult tsa(std::span<const double> signal, double fs, double shaft_freq) {
  if (!(shaft_freq > 0.0) || !(fs > 0.0))
    throw DomainError("sample rate and shaft frequency must be positive");
  const double exact = fs / shaft_freq;
  const auto V = static_cast<std::size_t>(std::llround(exact));
  if (V < 2) throw DomainError("shaft period shorter than 2 samples");
  if (signal.size() < V) throw DomainError("signal shorter than one shaft period");

  TsaResult r;
  r.period_samples = V;
  r.n_averages = signal.size() / V;
  r.averaged.assign(V, 0.0);
  for (std::size_t rev = 0; rev < r.n_averages; ++rev) {
    const std::size_t base = rev * V;
    for (std::size_t i = 0; i < V; ++i) r.averaged[i] += signal[base + i];
  }
  const double inv = 1.0 / static_cast<double>(r.n_averages);
  for (double& v : r.averaged) v *= inv;

  double ss = 0.0;
  for (std::size_t rev = 0; rev < r.n_averages; ++rev) {
    const std::size_t base = rev * V;
    for (std::size_t i = 0; i < V; ++i) {
      const double e = signal[base + i] - r.averaged[i];
      ss += e * e;
    }
  }
  r.residual_rms = std::sqrt(ss / static_cast<double>(r.n_averages * V));
  r.drift_samples = std::abs(exact - static_cast<double>(V)) * static_cast<double>(r.n_averages);
  r.drift_warning = r.drift_samples > 0.5;
  return r;
}

std::vector<TsaResult> tsa_bank(const vmd::VmdResult& decomposition, double fs,
                                double shaft_freq) {
  if (decomposition.modes.empty()) throw DomainError("decomposition has no modes");
  std::vector<TsaResult> out;
  out.reserve(decomposition.modes.size());
  for (const auto& mode : decomposition.modes) out.push_back(tsa(mode, fs, shaft_freq));
  return out;
}

}  // namespace gearcrack::tsa
