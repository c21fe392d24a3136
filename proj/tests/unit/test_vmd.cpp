#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gearcrack/error.hpp"
#include "gearcrack/fft.hpp"
#include "gearcrack/vmd.hpp"

using gearcrack::DomainError;
namespace fft = gearcrack::fft;
using gearcrack::vmd::vmd;
using gearcrack::vmd::Init;
using gearcrack::vmd::VmdConfig;
using gearcrack::vmd::mirror_crop;
using gearcrack::vmd::mirror_extend;
using gearcrack::vmd::spectrum;
using gearcrack::vmd::inverse_spectrum;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> tone(double f, double amp, double fs, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2 * kPi * f * static_cast<double>(i) / fs);
  return x;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// RMS spectral width about the power-weighted mean frequency.
double rms_bandwidth(const std::vector<double>& x, double fs) {
  const auto X = fft::rfft(x);
  const double df = fs / static_cast<double>(x.size());
  double total = 0, mean = 0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    total += std::norm(X[k]);
    mean += std::norm(X[k]) * k * df;
  }
  mean /= total;
  double var = 0;
  for (std::size_t k = 0; k < X.size(); ++k) var += std::norm(X[k]) * (k * df - mean) * (k * df - mean);
  return std::sqrt(var / total);
}

}  // namespace

TEST(VmdConfig, Validation) {
  VmdConfig c;
  EXPECT_NO_THROW(c.validate());
  c.K = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.alpha = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.tau = -1;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.eps = 0;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(Vmd, SingleToneCenterFrequency) {
  const auto x = tone(50.0, 1.0, 4000.0, 4000);
  VmdConfig c;
  c.K = 1;
  const auto r = vmd(x, 4000.0, c);
  ASSERT_EQ(r.center_freqs_Hz.size(), 1u);
  EXPECT_NEAR(r.center_freqs_Hz[0], 50.0, 0.5);
  EXPECT_TRUE(r.converged);
}

TEST(Vmd, TwoToneRecovery) {
  const double fs = 4000.0;
  const auto a = tone(50.0, 1.0, fs, 4000);
  const auto b = tone(200.0, 0.5, fs, 4000);
  std::vector<double> x(a.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = a[i] + b[i];
  VmdConfig c;
  c.K = 2;
  const auto r = vmd(x, fs, c);
  EXPECT_NEAR(r.center_freqs_Hz[0], 50.0, 1.0);
  EXPECT_NEAR(r.center_freqs_Hz[1], 200.0, 4.0);
  EXPECT_GT(correlation(r.modes[0], a), 0.95);
  EXPECT_GT(correlation(r.modes[1], b), 0.95);
}

TEST(Vmd, ReconstructionIdentity) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<double> x(1500);
  for (auto& v : x) v = g(rng);
  VmdConfig c;
  c.K = 3;
  const auto r = vmd(x, 1000.0, c);
  ASSERT_EQ(r.modes.size(), 3u);
  ASSERT_EQ(r.residual.size(), x.size());
  double scale = 0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = r.residual[i];
    for (const auto& m : r.modes) s += m[i];
    EXPECT_NEAR(s, x[i], 1e-12 * scale);
  }
}

TEST(Vmd, OutputOrderedByFrequencyForEveryInit) {
  const double fs = 2000.0;
  std::vector<double> x(2000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / fs;
    x[i] = std::sin(2 * kPi * 300 * t) + std::sin(2 * kPi * 40 * t) + 0.7 * std::sin(2 * kPi * 120 * t);
  }
  for (Init init : {Init::uniform, Init::random, Init::zeros}) {
    VmdConfig c;
    c.K = 3;
    c.init = init;
    c.seed = 17;
    const auto r = vmd(x, fs, c);
    EXPECT_TRUE(std::is_sorted(r.center_freqs_Hz.begin(), r.center_freqs_Hz.end()));
    for (double f : r.center_freqs_Hz) {
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, fs / 2);
    }
  }
}

TEST(Vmd, DcModeStaysAtZero) {
  std::vector<double> x = tone(100.0, 1.0, 1000.0, 1000);
  for (double& v : x) v += 2.0;
  VmdConfig c;
  c.K = 2;
  c.dc_mode = true;
  const auto r = vmd(x, 1000.0, c);
  EXPECT_EQ(r.center_freqs_Hz[0], 0.0);
  EXPECT_NEAR(r.center_freqs_Hz[1], 100.0, 2.0);
}

TEST(Vmd, LinearInAmplitude) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  std::vector<double> x = tone(60.0, 1.0, 1000.0, 1200);
  for (auto& v : x) v += 0.3 * g(rng);
  std::vector<double> y(x);
  for (auto& v : y) v *= 7.5;
  VmdConfig c;
  c.K = 3;
  const auto a = vmd(x, 1000.0, c);
  const auto b = vmd(y, 1000.0, c);
  ASSERT_EQ(a.iterations, b.iterations);
  for (int k = 0; k < 3; ++k) {
    double peak = 0;
    for (double v : b.modes[k]) peak = std::max(peak, std::abs(v));
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(b.modes[k][i], 7.5 * a.modes[k][i], 1e-8 * peak);
  }
}

TEST(Vmd, LargerAlphaNarrowsModes) {
  const double fs = 4000.0;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  const auto a = tone(50.0, 1.0, fs, 4000);
  const auto b = tone(200.0, 0.5, fs, 4000);
  std::vector<double> x(a.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = a[i] + b[i] + 0.2 * g(rng);
  VmdConfig lo, hi;
  lo.K = hi.K = 2;
  lo.alpha = 200.0;
  hi.alpha = 2000.0;
  const auto rl = vmd(x, fs, lo);
  const auto rh = vmd(x, fs, hi);
  for (int k = 0; k < 2; ++k) EXPECT_LT(rms_bandwidth(rh.modes[k], fs), rms_bandwidth(rl.modes[k], fs));
}

TEST(Vmd, RejectsBadInput) {
  VmdConfig c;
  c.K = 2;
  EXPECT_THROW(vmd(std::vector<double>(100, 0.0), 100.0, c), DomainError);
  std::vector<double> x = tone(5.0, 1.0, 100.0, 100);
  x[10] = std::nan("");
  EXPECT_THROW(vmd(x, 100.0, c), DomainError);
  EXPECT_THROW(vmd(std::vector<double>{1.0, 2.0, 3.0}, 100.0, c), DomainError);
}

TEST(Vmd, MaxItersFlagged) {
  std::vector<double> x = tone(30.0, 1.0, 1000.0, 1000);
  VmdConfig c;
  c.K = 2;
  c.max_iters = 2;
  const auto r = vmd(x, 1000.0, c);
  EXPECT_EQ(r.iterations, 2);
  EXPECT_FALSE(r.converged);
  EXPECT_GE(r.final_update_norm, c.eps);
}

TEST(Vmd, MultiplierStepStillReconstructs) {
  std::vector<double> x = tone(30.0, 1.0, 1000.0, 1000);
  const auto y = tone(170.0, 0.4, 1000.0, 1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
  VmdConfig c;
  c.K = 2;
  c.tau = 0.1;
  const auto r = vmd(x, 1000.0, c);
  EXPECT_NEAR(r.center_freqs_Hz[0], 30.0, 1.0);
  EXPECT_NEAR(r.center_freqs_Hz[1], 170.0, 3.0);
}

TEST(Mirror, RoundTrip) {
  const std::vector<double> x{1, 2, 3, 4};
  const auto e = mirror_extend(x);
  EXPECT_EQ(e, (std::vector<double>{2, 1, 1, 2, 3, 4, 4, 3}));
  EXPECT_EQ(mirror_crop(e, 4), x);
  const std::vector<double> odd{5, 6, 7, 8, 9};
  EXPECT_EQ(mirror_crop(mirror_extend(odd), 5), odd);
  EXPECT_THROW(mirror_extend(std::vector<double>{1.0}), DomainError);
}

TEST(Mirror, SymmetricStaysSymmetric) {
  const auto e = mirror_extend(std::vector<double>{1, 3, 5, 5, 3, 1});
  EXPECT_TRUE(std::equal(e.begin(), e.end(), e.rbegin()));
}

TEST(Mirror, LessLeakageThanZeroPaddingOnRamp) {
  const std::size_t n = 512;
  std::vector<double> ramp(n);
  for (std::size_t i = 0; i < n; ++i) ramp[i] = 1.0 + static_cast<double>(i) / n;
  const auto mirrored = mirror_extend(ramp);
  std::vector<double> padded(2 * n, 0.0);
  std::copy(ramp.begin(), ramp.end(), padded.begin() + n / 2);
  // Energy above the lowest tenth of the band measures the edge discontinuities.
  auto high_energy = [](const std::vector<double>& x) {
    const auto X = fft::rfft(x);
    double e = 0;
    for (std::size_t k = X.size() / 10; k < X.size(); ++k) e += std::norm(X[k]);
    return e;
  };
  EXPECT_LT(high_energy(mirrored), 0.5 * high_energy(padded));
}

TEST(Spectrum, ImpulseIsFlat) {
  std::vector<double> x(64, 0.0);
  x[0] = 1.0;
  const auto h = spectrum(x);
  for (const auto& b : h.bins) EXPECT_NEAR(std::abs(b), 1.0, 1e-14);
}

TEST(Spectrum, RoundTripAndParseval) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (std::size_t n : {1000u, 1001u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = g(rng);
    const auto h = spectrum(x);
    const auto y = inverse_spectrum(h);
    double err = 0, e = 0;
    for (std::size_t i = 0; i < n; ++i) {
      err += (x[i] - y[i]) * (x[i] - y[i]);
      e += x[i] * x[i];
    }
    EXPECT_LT(std::sqrt(err / n), 1e-10);
    EXPECT_NEAR(h.energy(), e, 1e-9 * e);
  }
}

TEST(Spectrum, RejectsNonFinite) {
  EXPECT_THROW(spectrum(std::vector<double>{1.0, std::nan("")}), DomainError);
}
