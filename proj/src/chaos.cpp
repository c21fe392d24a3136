#include "gearcrack/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gearcrack/error.hpp"

namespace gearcrack::chaos {

namespace {

double squared_distance(const double* a, const double* b, int m) {
  double s = 0.0;
  for (int k = 0; k < m; ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

// Returns the standard deviation of the input.
double require_variance(std::span<const double> signal) {
  const auto [lo, hi] = std::minmax_element(signal.begin(), signal.end());
  if (signal.empty() || *lo == *hi) throw DomainError("zero-variance input");
  double mean = 0.0;
  for (double v : signal) {
    if (!std::isfinite(v)) throw DomainError("non-finite sample in input");
    mean += v;
  }
  mean /= static_cast<double>(signal.size());
  double var = 0.0;
  for (double v : signal) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(signal.size()));
}

std::size_t gap(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

std::optional<FitRange> growth_phase_run(std::span<const double> curve) {
  const std::size_t n = curve.size();
  const double c0 = curve.front();
  const double cmax = *std::max_element(curve.begin(), curve.end());
  if (cmax - c0 < 0.1) return std::nullopt;

  std::size_t sat = 0;
  while (sat + 1 < n && curve[sat] < cmax - 0.1 * (cmax - c0)) ++sat;
  if (sat + 1 < 4) return std::nullopt;

  std::vector<double> x(sat + 1);
  for (std::size_t i = 0; i <= sat; ++i) x[i] = static_cast<double>(i);
  auto run = longest_linear_run(x, curve.subspan(0, sat + 1), 0.15, 4);
  if (run) return run;
  return FitRange{0, sat};
}

void check_range(const FitRange& r, std::size_t n, const char* what) {
  if (r.lo >= r.hi || r.hi >= n) {
    throw OutOfRangeError(std::string("pinned fit range outside the ") + what);
  }
}

}  // namespace

double Embedding::distance(std::size_t a, std::size_t b) const {
  return std::sqrt(squared_distance(point(a), point(b), m));
}

Embedding embed(std::span<const double> signal, int m, int d) {
  if (m < 1 || d < 1) throw DomainError("embedding needs m >= 1 and d >= 1");
  const std::size_t span = static_cast<std::size_t>(m - 1) * static_cast<std::size_t>(d);
  if (signal.size() <= span) throw DomainError("signal too short for the requested embedding");
  const std::size_t count = signal.size() - span;

  Embedding e;
  e.m = m;
  e.d = d;
  e.points.resize(count * static_cast<std::size_t>(m));
  for (std::size_t j = 0; j < count; ++j) {
    for (int k = 0; k < m; ++k) {
      e.points[j * m + k] = signal[j + static_cast<std::size_t>(k * d)];
    }
  }
  return e;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DomainError("least squares needs two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("least squares with coincident abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return fit;
}

std::optional<FitRange> longest_linear_run(std::span<const double> x, std::span<const double> y,
                                           double tolerance, std::size_t min_points) {
  const std::size_t n = x.size();
  if (n < std::max<std::size_t>(min_points, 2)) return std::nullopt;
  std::vector<double> s(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) s[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);

  std::optional<FitRange> best;
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = s.size(); b-- > a;) {
      const std::size_t points = b - a + 2;
      if (points < min_points) break;
      if (best && points <= best->hi - best->lo + 1) break;
      double mean = 0.0;
      for (std::size_t i = a; i <= b; ++i) mean += s[i];
      mean /= static_cast<double>(b - a + 1);
      if (mean == 0.0) continue;
      bool ok = true;
      for (std::size_t i = a; i <= b && ok; ++i) ok = std::abs(s[i] - mean) <= tolerance * std::abs(mean);
      if (ok) {
        best = FitRange{a, b + 1};
        break;
      }
    }
  }
  return best;
}

LeEstimate lyapunov(std::span<const double> signal, double sample_rate_Hz, const LeConfig& config) {
  if (!(sample_rate_Hz > 0.0)) throw DomainError("sample rate must be positive");
  // Separations below this are rounding noise (exact orbit repeats) and
  // carry no divergence information.
  const double floor_d2 = std::pow(1e-9 * require_variance(signal), 2) * config.m;
  const Embedding e = embed(signal, config.m, config.d);
  const std::size_t M = e.count();
  if (M < 100) throw DomainError("lyapunov needs at least 100 embedded points");
  const std::size_t steps = config.max_steps;
  if (steps < 4 || M <= steps + config.theiler_window + 1) {
    throw DomainError("record too short for the divergence horizon");
  }
  const std::size_t usable = M - steps;

  std::vector<std::size_t> neighbour(usable, usable);
  for (std::size_t j = 0; j < usable; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < usable; ++k) {
      if (gap(j, k) <= config.theiler_window) continue;
      const double d2 = squared_distance(e.point(j), e.point(k), e.m);
      if (d2 > floor_d2 && d2 < best) {
        best = d2;
        neighbour[j] = k;
      }
    }
  }

  LeEstimate out;
  out.divergence_curve.resize(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < usable; ++j) {
      if (neighbour[j] == usable) continue;
      const double d2 = squared_distance(e.point(j + i), e.point(neighbour[j] + i), e.m);
      if (d2 > floor_d2) {
        sum += 0.5 * std::log(d2);
        ++n;
      }
    }
    if (n == 0) throw DomainError("no separable neighbour pairs; input is degenerate");
    out.divergence_curve[i] = sum / static_cast<double>(n);
  }

  const std::span<const double> curve(out.divergence_curve);
  if (config.fit.pinned) {
    check_range(*config.fit.pinned, curve.size(), "divergence curve");
    out.fit_range = *config.fit.pinned;
  } else {
    out.fit_range = growth_phase_run(curve).value_or(FitRange{0, curve.size() - 1});
  }

  std::vector<double> x;
  for (std::size_t i = out.fit_range.lo; i <= out.fit_range.hi; ++i) x.push_back(static_cast<double>(i));
  const LinearFit fit =
      least_squares(x, curve.subspan(out.fit_range.lo, out.fit_range.hi - out.fit_range.lo + 1));
  out.lambda_per_sample = fit.slope;
  out.lambda_per_second = fit.slope * sample_rate_Hz;
  out.r2 = fit.r2;
  out.reliable = fit.r2 >= config.reliable_r2;
  return out;
}

CdEstimate correlation_dimension(std::span<const double> signal, const CdConfig& config) {
  require_variance(signal);
  return correlation_dimension(embed(signal, config.m, config.d), config);
}

CdEstimate correlation_dimension(const Embedding& e, const CdConfig& config) {
  const std::size_t M = e.count();
  if (M < 200) throw DomainError("correlation dimension needs at least 200 embedded points");
  const std::size_t w = config.theiler_window;

  double min_d2 = std::numeric_limits<double>::infinity();
  double max_d2 = 0.0;
  std::size_t admissible = 0;
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = i + w + 1; j < M; ++j) {
      const double d2 = squared_distance(e.point(i), e.point(j), e.m);
      if (d2 > 0.0) min_d2 = std::min(min_d2, d2);
      max_d2 = std::max(max_d2, d2);
      ++admissible;
    }
  }
  if (admissible == 0) throw DomainError("Theiler window excludes every pair");
  if (max_d2 == 0.0) throw DomainError("all embedded points are identical");

  CdEstimate out;
  out.admissible_pairs = admissible;
  if (!config.radii.radii.empty()) {
    out.radii = config.radii.radii;
    if (!std::is_sorted(out.radii.begin(), out.radii.end()) || out.radii.front() <= 0.0) {
      throw DomainError("radii must be positive and ascending");
    }
  } else {
    const std::size_t n = std::max<std::size_t>(config.radii.count, 4);
    const double lo = 0.5 * std::log(min_d2);
    const double hi = 0.5 * std::log(max_d2);
    out.radii.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      out.radii[k] = std::exp(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1));
    }
    out.radii.front() = std::sqrt(min_d2);
    out.radii.back() = std::sqrt(max_d2);
  }

  // Pairs are binned by the first radius that covers them; a prefix sum then
  // gives #{d <= r_k}.
  const std::size_t nr = out.radii.size();
  std::vector<double> r2(nr);
  for (std::size_t k = 0; k < nr; ++k) r2[k] = out.radii[k] * out.radii[k];
  if (config.radii.radii.empty()) {
    r2.front() = min_d2;
    r2.back() = max_d2;
  }
  std::vector<std::size_t> hist(nr + 1, 0);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = i + w + 1; j < M; ++j) {
      const double d2 = squared_distance(e.point(i), e.point(j), e.m);
      ++hist[static_cast<std::size_t>(std::lower_bound(r2.begin(), r2.end(), d2) - r2.begin())];
    }
  }
  out.pair_counts.resize(nr);
  out.corr_sums.resize(nr);
  std::size_t cum = 0;
  for (std::size_t k = 0; k < nr; ++k) {
    cum += hist[k];
    out.pair_counts[k] = cum;
    out.corr_sums[k] = static_cast<double>(cum) / static_cast<double>(admissible);
  }

  std::vector<double> lr(nr), lc(nr);
  for (std::size_t k = 0; k < nr; ++k) {
    lr[k] = std::log(out.radii[k]);
    lc[k] = out.corr_sums[k] > 0.0 ? std::log(out.corr_sums[k]) : -std::numeric_limits<double>::infinity();
  }

  if (config.fit.pinned) {
    check_range(*config.fit.pinned, nr, "radius grid");
    out.fit_range = *config.fit.pinned;
    if (out.pair_counts[out.fit_range.lo] == 0) throw DomainError("pinned fit range has empty C(r)");
  } else {
    std::size_t a = 0;
    while (a < nr && out.pair_counts[a] < config.min_pairs) ++a;
    std::size_t b = nr;
    while (b > a && out.pair_counts[b - 1] == admissible) --b;
    if (b < a + 2) {
      a = 0;
      while (a < nr && out.pair_counts[a] == 0) ++a;
      b = nr;
    }
    if (b < a + 2) throw DomainError("too few populated radii to fit a slope");
    const std::span<const double> x(lr.data() + a, b - a), y(lc.data() + a, b - a);
    if (auto run = longest_linear_run(x, y, 0.15, 4)) {
      out.fit_range = {run->lo + a, run->hi + a};
    } else {
      out.fit_range = {a, b - 1};
    }
  }

  const std::size_t len = out.fit_range.hi - out.fit_range.lo + 1;
  const LinearFit fit = least_squares(std::span<const double>(lr.data() + out.fit_range.lo, len),
                                      std::span<const double>(lc.data() + out.fit_range.lo, len));
  out.cd = std::max(fit.slope, 0.0);
  out.slope_r2 = fit.r2;
  out.r_lo = out.radii[out.fit_range.lo];
  out.r_hi = out.radii[out.fit_range.hi];
  out.reliable = fit.r2 >= config.reliable_r2;
  return out;
}

std::string condition_name(int crack_index) {
  if (crack_index < 0) throw DomainError("negative crack index");
  return crack_index == 0 ? "H" : "C" + std::to_string(crack_index);
}

std::string feature_label(int crack_index, int mode) {
  if (mode < 1) throw DomainError("mode index is 1-based");
  const std::string m = std::to_string(mode);
  return crack_index == 0 ? "H" + m + "_" + m : condition_name(crack_index) + "_" + m;
}

std::vector<FeatureRecord> feature_table(std::span<const ConditionSeries> conditions,
                                         double sample_rate_Hz, const ChaosConfig& config) {
  std::optional<std::size_t> length;
  for (const auto& c : conditions) {
    for (const auto& mode : c.modes) {
      if (length && *length != mode.averaged.size()) {
        throw DomainError("feature table inputs differ in length");
      }
      length = mode.averaged.size();
    }
  }

  LeConfig le_cfg;
  le_cfg.m = config.m;
  le_cfg.d = config.d;
  le_cfg.theiler_window = config.le_theiler_window;
  le_cfg.max_steps = config.le_max_steps;
  CdConfig cd_cfg;
  cd_cfg.m = config.m;
  cd_cfg.d = config.d;
  cd_cfg.theiler_window = config.cd_theiler_window;
  cd_cfg.radii.count = config.cd_radii;

  std::vector<FeatureRecord> records;
  for (const auto& c : conditions) {
    for (std::size_t k = 0; k < c.modes.size(); ++k) {
      FeatureRecord r;
      r.mode = static_cast<int>(k) + 1;
      r.label = feature_label(c.crack_index, r.mode);
      r.condition = condition_name(c.crack_index);
      r.speed_load = c.speed_load;
      r.snr_db = c.snr_db;
      const auto& series = c.modes[k].averaged;
      try {
        r.le = lyapunov(series, sample_rate_Hz, le_cfg);
      } catch (const Error& ex) {
        r.le_error = ex.what();
      }
      try {
        r.cd = correlation_dimension(series, cd_cfg);
      } catch (const Error& ex) {
        r.cd_error = ex.what();
      }
      records.push_back(std::move(r));
    }
  }
  return records;
}

}  // namespace gearcrack::chaos
