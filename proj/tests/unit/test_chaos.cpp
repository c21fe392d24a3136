#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gearcrack/chaos.hpp"
#include "gearcrack/error.hpp"

using namespace gearcrack;
using namespace gearcrack::chaos;

namespace {

std::vector<double> logistic(std::size_t n, double x0 = 0.1234) {
  std::vector<double> x(n);
  x[0] = x0;
  for (std::size_t i = 1; i < n; ++i) x[i] = 4.0 * x[i - 1] * (1.0 - x[i - 1]);
  return x;
}

std::vector<double> henon_x(std::size_t n) {
  double x = 0.1, y = 0.1;
  for (int i = 0; i < 1000; ++i) {
    const double xn = 1.0 - 1.4 * x * x + y;
    y = 0.3 * x;
    x = xn;
  }
  std::vector<double> out(n);
  for (auto& v : out) {
    const double xn = 1.0 - 1.4 * x * x + y;
    y = 0.3 * x;
    x = xn;
    v = x;
  }
  return out;
}

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

std::vector<double> sine(std::size_t n, double w) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(w * static_cast<double>(i));
  return x;
}

}  // namespace

TEST(Embed, IdentityForDimensionOne) {
  const std::vector<double> x{3, 1, 4, 1, 5};
  const auto e = embed(x, 1, 1);
  EXPECT_EQ(e.count(), 5u);
  EXPECT_EQ(e.points, x);
}

TEST(Embed, SmallExample) {
  const std::vector<double> x{0, 1, 2, 3, 4};
  const auto e = embed(x, 3, 1);
  ASSERT_EQ(e.count(), 3u);
  EXPECT_EQ(e.points, (std::vector<double>{0, 1, 2, 1, 2, 3, 2, 3, 4}));
  EXPECT_DOUBLE_EQ(e.distance(0, 2), std::sqrt(12.0));
}

TEST(Embed, CountingGrid) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> nd(20, 300), md(1, 6), dd(1, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = nd(rng), m = md(rng), d = dd(rng);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = i;
    const auto e = embed(x, m, d);
    ASSERT_EQ(e.count(), static_cast<std::size_t>(n - (m - 1) * d));
    const std::size_t j = e.count() - 1;
    for (int c = 0; c < m; ++c) EXPECT_EQ(e.point(j)[c], static_cast<double>(j + c * d));
  }
}

TEST(Embed, Errors) {
  EXPECT_THROW(embed(std::vector<double>{1, 2}, 3, 1), DomainError);
  EXPECT_THROW(embed(std::vector<double>{1, 2, 3}, 0, 1), DomainError);
  EXPECT_THROW(embed(std::vector<double>{1, 2, 3}, 2, 0), DomainError);
}

TEST(LinearFitTest, ExactLine) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = least_squares(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.r2, 1.0, 1e-14);
}

TEST(LinearFitTest, LongestRunFindsStraightPart) {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i);
    y.push_back(i < 12 ? 0.5 * i : 6.0 + 0.01 * (i - 12));
  }
  const auto r = longest_linear_run(x, y, 0.15, 4);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->lo, 0u);
  EXPECT_GE(r->hi, 10u);
  EXPECT_LE(r->hi, 12u);
}

TEST(Lyapunov, LogisticMap) {
  const auto e = lyapunov(logistic(5000), 1.0);
  EXPECT_NEAR(e.lambda_per_sample, std::numbers::ln2, 0.1 * std::numbers::ln2);
  EXPECT_TRUE(e.reliable);
  EXPECT_LE(e.fit_range.hi, e.divergence_curve.size() - 1);
  EXPECT_GE(e.r2, 0.0);
  EXPECT_LE(e.r2, 1.0);
}

TEST(Lyapunov, PerSecondScalesWithRate) {
  const auto a = lyapunov(logistic(3000), 1.0);
  const auto b = lyapunov(logistic(3000), 250.0);
  EXPECT_DOUBLE_EQ(b.lambda_per_second, 250.0 * a.lambda_per_sample);
  EXPECT_DOUBLE_EQ(a.lambda_per_sample, b.lambda_per_sample);
}

TEST(Lyapunov, SineIsNeutral) {
  const auto e = lyapunov(sine(5000, 0.173), 1.0);
  EXPECT_LT(std::abs(e.lambda_per_sample), 0.01);
  const auto p = lyapunov(sine(5000, 2 * std::numbers::pi / 37.3), 1.0);
  EXPECT_LT(std::abs(p.lambda_per_sample), 0.01);
}

TEST(Lyapunov, NoiseFlaggedUnreliable) {
  const auto e = lyapunov(gaussian(4000, 99), 1.0);
  EXPECT_GT(e.lambda_per_sample, 0.0);
  EXPECT_LT(e.r2, 0.9);
  EXPECT_FALSE(e.reliable);
}

TEST(Lyapunov, ScaleInvariant) {
  const auto x = logistic(3000);
  for (double c : {1e-3, 7.0, 1e4}) {
    std::vector<double> y(x);
    for (auto& v : y) v *= c;
    const auto a = lyapunov(x, 1.0), b = lyapunov(y, 1.0);
    EXPECT_NEAR(a.lambda_per_sample, b.lambda_per_sample, 1e-6);
  }
}

TEST(Lyapunov, TranslationInvariant) {
  const auto x = henon_x(3000);
  std::vector<double> y(x);
  for (auto& v : y) v += 3.0;
  EXPECT_NEAR(lyapunov(x, 1.0).lambda_per_sample, lyapunov(y, 1.0).lambda_per_sample, 1e-9);
}

TEST(Lyapunov, PinnedFitRange) {
  LeConfig c;
  c.fit = FitPolicy::fixed(2, 6);
  const auto e = lyapunov(logistic(3000), 1.0, c);
  EXPECT_EQ(e.fit_range.lo, 2u);
  EXPECT_EQ(e.fit_range.hi, 6u);
  std::vector<double> xs, ys;
  for (std::size_t i = 2; i <= 6; ++i) {
    xs.push_back(static_cast<double>(i));
    ys.push_back(e.divergence_curve[i]);
  }
  EXPECT_DOUBLE_EQ(e.lambda_per_sample, least_squares(xs, ys).slope);
  c.fit = FitPolicy::fixed(5, 500);
  EXPECT_THROW(lyapunov(logistic(3000), 1.0, c), OutOfRangeError);
}

TEST(Lyapunov, Errors) {
  try {
    lyapunov(std::vector<double>(500, 2.0), 1.0);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("zero-variance input"), std::string::npos);
  }
  EXPECT_THROW(lyapunov(logistic(50), 1.0), DomainError);
}

TEST(CorrelationDimension, LineSegment) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Embedding e{3, 1, {}};
  for (int i = 0; i < 2000; ++i) {
    const double t = u(rng);
    e.points.insert(e.points.end(), {t, 2.0 * t - 1.0, 0.5 * t});
  }
  CdConfig c;
  c.theiler_window = 0;
  EXPECT_NEAR(correlation_dimension(e, c).cd, 1.0, 0.1);
}

TEST(CorrelationDimension, Henon) {
  const auto r = correlation_dimension(henon_x(10000));
  EXPECT_NEAR(r.cd, 1.194, 0.1);
}

TEST(CorrelationDimension, NoiseFillsSpace) {
  const auto r = correlation_dimension(gaussian(5000, 7));
  EXPECT_NEAR(r.cd, 3.0, 0.3);
}

TEST(CorrelationDimension, Invariants) {
  const auto r = correlation_dimension(logistic(2000));
  ASSERT_EQ(r.radii.size(), 32u);
  for (std::size_t i = 1; i < r.radii.size(); ++i) {
    EXPECT_GT(r.radii[i], r.radii[i - 1]);
    EXPECT_GE(r.corr_sums[i], r.corr_sums[i - 1]);
  }
  for (double c : r.corr_sums) {
    EXPECT_GT(c, 0.0);
    EXPECT_LE(c, 1.0);
  }
  EXPECT_DOUBLE_EQ(r.corr_sums.back(), 1.0);
  EXPECT_GE(r.cd, 0.0);
  EXPECT_LE(r.r_lo, r.r_hi);
}

TEST(CorrelationDimension, TranslationInvariant) {
  const auto x = henon_x(3000);
  std::vector<double> y(x);
  for (auto& v : y) v -= 11.0;
  EXPECT_NEAR(correlation_dimension(x).cd, correlation_dimension(y).cd, 1e-9);
}

TEST(CorrelationDimension, TheilerWindowEffectOnSine) {
  const double period = 37.3;
  const auto x = sine(4000, 2 * std::numbers::pi / period);
  CdConfig a, b;
  a.theiler_window = 0;
  b.theiler_window = 37;
  const double cd0 = correlation_dimension(x, a).cd;
  const double cd1 = correlation_dimension(x, b).cd;
  EXPECT_NEAR(cd0, 1.0, 0.1);
  EXPECT_LT(std::abs(cd0 - cd1), 0.2);
}

TEST(CorrelationDimension, PinnedFitAndExplicitRadii) {
  CdConfig c;
  c.radii.radii = {0.01, 0.02, 0.04, 0.08, 0.16, 0.32};
  c.fit = FitPolicy::fixed(1, 4);
  const auto r = correlation_dimension(henon_x(3000), c);
  EXPECT_EQ(r.radii, c.radii.radii);
  EXPECT_EQ(r.fit_range.lo, 1u);
  EXPECT_EQ(r.fit_range.hi, 4u);
  EXPECT_DOUBLE_EQ(r.r_lo, 0.02);
  EXPECT_DOUBLE_EQ(r.r_hi, 0.16);
}

TEST(CorrelationDimension, Errors) {
  EXPECT_THROW(correlation_dimension(std::vector<double>(500, 1.0)), DomainError);
  EXPECT_THROW(correlation_dimension(logistic(150)), DomainError);
}

TEST(Labels, Format) {
  EXPECT_EQ(condition_name(0), "H");
  EXPECT_EQ(condition_name(2), "C2");
  EXPECT_EQ(feature_label(0, 1), "H1_1");
  EXPECT_EQ(feature_label(3, 5), "C3_5");
  EXPECT_EQ(feature_label(1, 1), "C1_1");
  EXPECT_EQ(feature_label(0, 4), "H4_4");
}

namespace {

tsa::TsaResult as_tsa(std::vector<double> x) {
  tsa::TsaResult r;
  r.period_samples = x.size();
  r.n_averages = 1;
  r.averaged = std::move(x);
  return r;
}

}  // namespace

TEST(FeatureTable, MatrixSizeAndComposition) {
  std::vector<ConditionSeries> conds;
  std::uint64_t seed = 1;
  for (const char* sl : {"a", "b"}) {
    for (int crack = 0; crack < 4; ++crack) {
      for (double snr : {10.0, -10.0}) {
        ConditionSeries c{crack, sl, snr, {}};
        for (int k = 0; k < 5; ++k) c.modes.push_back(as_tsa(gaussian(400, seed++)));
        conds.push_back(c);
      }
    }
  }
  ChaosConfig cfg;
  const auto recs = feature_table(conds, 1000.0, cfg);
  ASSERT_EQ(recs.size(), 80u);
  EXPECT_EQ(recs[0].label, "H1_1");
  EXPECT_EQ(recs[0].condition, "H");
  EXPECT_EQ(recs[0].speed_load, "a");
  EXPECT_EQ(recs[0].mode, 1);

  LeConfig lc;
  CdConfig cc;
  const auto le = lyapunov(conds[0].modes[0].averaged, 1000.0, lc);
  const auto cd = correlation_dimension(conds[0].modes[0].averaged, cc);
  ASSERT_TRUE(recs[0].le && recs[0].cd);
  EXPECT_EQ(recs[0].le->lambda_per_second, le.lambda_per_second);
  EXPECT_EQ(recs[0].cd->cd, cd.cd);
}

TEST(FeatureTable, IdenticalInputsGiveIdenticalFeatures) {
  const auto x = henon_x(500);
  std::vector<ConditionSeries> conds{{0, "s", 10.0, {as_tsa(x)}}, {1, "s", 10.0, {as_tsa(x)}}};
  const auto recs = feature_table(conds, 100.0, {});
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].le->lambda_per_second, recs[1].le->lambda_per_second);
  EXPECT_EQ(recs[0].cd->cd, recs[1].cd->cd);
  EXPECT_EQ(recs[1].label, "C1_1");
}

TEST(FeatureTable, FailureBecomesNullFeature) {
  std::vector<ConditionSeries> conds{{0, "s", 10.0, {as_tsa(std::vector<double>(500, 0.0))}}};
  const auto recs = feature_table(conds, 100.0, {});
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_FALSE(recs[0].le);
  EXPECT_FALSE(recs[0].cd);
  EXPECT_NE(recs[0].le_error.find("zero-variance"), std::string::npos);
  EXPECT_FALSE(recs[0].reliable());
}

TEST(FeatureTable, RejectsUnequalLengths) {
  std::vector<ConditionSeries> conds{{0, "s", 10.0, {as_tsa(henon_x(500)), as_tsa(henon_x(400))}}};
  EXPECT_THROW(feature_table(conds, 100.0, {}), DomainError);
}
