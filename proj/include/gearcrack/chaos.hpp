#pragma once

// Nonlinear features of scalar series: delay embedding, largest Lyapunov
// exponent (Rosenstein) and correlation dimension (Grassberger-Procaccia).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gearcrack/tsa.hpp"

namespace gearcrack::chaos {

struct Embedding {
  int m = 0;
  int d = 0;
  // Row-major, points.size() == count() * m.
  std::vector<double> points;

  std::size_t count() const { return m > 0 ? points.size() / static_cast<std::size_t>(m) : 0; }
  const double* point(std::size_t j) const { return points.data() + j * static_cast<std::size_t>(m); }
  double distance(std::size_t a, std::size_t b) const;
};

Embedding embed(std::span<const double> signal, int m, int d);

// Inclusive index range into a curve.
struct FitRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

// Empty range means automatic selection.
struct FitPolicy {
  std::optional<FitRange> pinned;

  static FitPolicy automatic() { return {}; }
  static FitPolicy fixed(std::size_t lo, std::size_t hi) { return {FitRange{lo, hi}}; }
};

struct LeConfig {
  int m = 3;
  int d = 1;
  std::size_t theiler_window = 10;
  std::size_t max_steps = 30;
  FitPolicy fit;
  double reliable_r2 = 0.9;
};

struct LeEstimate {
  double lambda_per_sample = 0.0;
  double lambda_per_second = 0.0;
  FitRange fit_range;
  std::vector<double> divergence_curve;
  double r2 = 0.0;
  bool reliable = false;
};

LeEstimate lyapunov(std::span<const double> signal, double sample_rate_Hz, const LeConfig& config = {});

struct RadiiPolicy {
  std::size_t count = 32;
  // Explicit grid, ascending. Overrides the automatic log grid between the
  // smallest and largest admissible pair distance.
  std::vector<double> radii;
};

struct CdConfig {
  int m = 3;
  int d = 1;
  std::size_t theiler_window = 10;
  RadiiPolicy radii;
  FitPolicy fit;
  // Radii with fewer admissible pairs than this are not fitted.
  std::size_t min_pairs = 50;
  double reliable_r2 = 0.9;
};

struct CdEstimate {
  double cd = 0.0;
  std::vector<double> radii;
  std::vector<double> corr_sums;
  std::vector<std::size_t> pair_counts;
  std::size_t admissible_pairs = 0;
  FitRange fit_range;  // indices into radii
  double r_lo = 0.0;
  double r_hi = 0.0;
  double slope_r2 = 0.0;
  bool reliable = false;
};

CdEstimate correlation_dimension(std::span<const double> signal, const CdConfig& config = {});
// Works on arbitrary point sets; m and d in the config are ignored.
CdEstimate correlation_dimension(const Embedding& points, const CdConfig& config = {});

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

// Longest contiguous run of points [lo, hi] (at least min_points long) whose
// local slopes stay within `tolerance` of the run's mean slope.
std::optional<FitRange> longest_linear_run(std::span<const double> x, std::span<const double> y,
                                           double tolerance, std::size_t min_points);

struct ChaosConfig {
  int m = 3;
  int d = 1;
  std::size_t le_theiler_window = 10;
  std::size_t cd_theiler_window = 10;
  std::size_t le_max_steps = 30;
  std::size_t cd_radii = 32;
};

// One condition's TSA bank (one entry per mode, ascending center frequency).
struct ConditionSeries {
  int crack_index = 0;  // 0 healthy, j > 0 for crack level j
  std::string speed_load;
  double snr_db = 0.0;
  std::vector<tsa::TsaResult> modes;
};

struct FeatureRecord {
  std::string label;      // H1_1, C2_3, ...
  std::string condition;  // H, C1, C2, ...
  std::string speed_load;
  double snr_db = 0.0;
  int mode = 0;  // 1-based
  std::optional<LeEstimate> le;
  std::optional<CdEstimate> cd;
  std::string le_error;
  std::string cd_error;

  bool reliable() const { return le && cd && le->reliable && cd->reliable; }
};

std::string condition_name(int crack_index);
std::string feature_label(int crack_index, int mode);

std::vector<FeatureRecord> feature_table(std::span<const ConditionSeries> conditions,
                                         double sample_rate_Hz, const ChaosConfig& config);

}  // namespace gearcrack::chaos
