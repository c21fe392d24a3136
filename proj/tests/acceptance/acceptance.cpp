// Acceptance run: one PASS/FAIL line per criterion, then a summary.
// Exit status is 0 when every criterion passes, or when the only failures are
// the two trend criteria and the run report states that explicitly.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <string>

#include "gearcrack/cemg.hpp"
#include "gearcrack/chaos.hpp"
#include "gearcrack/error.hpp"
#include "gearcrack/pipeline.hpp"
#include "gearcrack/tsa.hpp"
#include "gearcrack/tvms.hpp"
#include "gearcrack/vmd.hpp"
#include "motor_oracle.hpp"

using namespace gearcrack;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHenonOracle = 1.194;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

cemg::State random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> cur(-20.0, 20.0), ang(0.0, 2 * kPi), spd(0.0, 170.0),
      small(-1e-5, 1e-5);
  cemg::State s;
  for (int i = 0; i < 6; ++i) s[i] = cur(rng);
  s[cemg::y_p] = small(rng);
  s[cemg::y_g] = small(rng);
  s[cemg::dy_p] = 1e2 * small(rng);
  s[cemg::dy_g] = 1e2 * small(rng);
  s[cemg::theta_p] = ang(rng);
  s[cemg::theta_g] = ang(rng);
  s[cemg::theta_r] = ang(rng);
  s[cemg::omega_p] = spd(rng);
  s[cemg::omega_g] = spd(rng);
  s[cemg::omega_r] = spd(rng);
  return s;
}

Outcome tvms_ordering() {
  const auto t0 = Clock::now();
  const tvms::GearGeometry g;
  const std::vector<double> depths{0.0, 0.2, 0.4, 0.6};
  std::vector<std::vector<double>> k;
  for (double d : depths) {
    const auto p = tvms::build_profile(g, tvms::CrackSpec{d, kPi / 4}, 1024);
    k.emplace_back(p.k_total_N_per_m.begin(), p.k_total_N_per_m.begin() + 1024);
  }
  const double secs = since(t0);
  bool ordered = true;
  double worst_strict = 1.0;
  for (std::size_t c = 1; c < k.size(); ++c) {
    std::size_t strict = 0;
    for (std::size_t i = 0; i < 1024; ++i) {
      if (k[c][i] > k[c - 1][i]) ordered = false;
      if (k[c][i] < k[c - 1][i]) ++strict;
    }
    worst_strict = std::min(worst_strict, strict / 1024.0);
  }
  return {ordered && worst_strict >= 0.9 && secs < 1.0,
          fmt("point-wise ordered=%s, strict fraction (worst pair)=%.3f, %.3f s", ordered ? "yes" : "no",
              worst_strict, secs)};
}

Outcome rk4_order() {
  const auto t0 = Clock::now();
  const auto p = cemg::SystemParams::defaults();
  const auto prof = tvms::StiffnessProfile::constant(2e8, 1e3, p.gear.mesh_period_rad());
  auto integrate = [&](double dt) {
    cemg::State s = cemg::State::Zero();
    const long n = std::lround(0.1 / dt);
    for (long i = 0; i < n; ++i) s = cemg::rk4_step(s, static_cast<double>(i) * dt, dt, p, prof);
    return s;
  };
  // Below about 1e-5 s the translational channels sit on their round-off floor
  // (pinion angle grows to ~10 rad while the mesh deflection is ~1e-7 m), so
  // the halving sequence starts at 4e-5 s, still within the explicit stability limit.
  const auto a = integrate(4e-5), b = integrate(2e-5), c = integrate(1e-5);
  // Each component scaled by its magnitude so currents and displacements weigh alike.
  const cemg::State scale = c.cwiseAbs().cwiseMax(1e-300);
  const double e1 = ((a - b).cwiseQuotient(scale)).norm();
  const double e2 = ((b - c).cwiseQuotient(scale)).norm();
  const double order = std::log2(e1 / e2);
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < cemg::kStateSize; ++i) {
    const double o = std::log2(std::abs((a[i] - b[i]) / (b[i] - c[i])));
    lo = std::min(lo, o);
    hi = std::max(hi, o);
  }
  const double secs = since(t0);
  return {order >= 3.5 && order <= 4.5 && secs < 30.0,
          fmt("observed order %.3f (per channel %.2f to %.2f), dt 4e-5/2e-5/1e-5 s, %.2f s", order, lo, hi, secs)};
}

Outcome electrical_fidelity() {
  std::mt19937_64 rng(303);
  auto p = cemg::SystemParams::defaults();
  const auto prof = tvms::StiffnessProfile::constant(2e8, 1e3, p.gear.mesh_period_rad());
  double worst_literal = 0.0, worst_recip = 0.0;
  for (int k = 0; k < 100; ++k) {
    const cemg::State s = random_state(rng);
    const double t = 0.0007 * k;
    const cemg::Vector6 V = cemg::supply_voltages(t, p.motor);

    p.motor.coupling = cemg::RotorCoupling::literal;
    const cemg::Vector6 got = cemg::derivatives(s, t, p, prof).head<6>();
    const cemg::Vector6 want = oracle::current_rates(s, V, p.motor);
    worst_literal = std::max(worst_literal, (got - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff());

    p.motor.coupling = cemg::RotorCoupling::reciprocal;
    const cemg::Vector6 dI = cemg::derivatives(s, t, p, prof).head<6>();
    const auto res = oracle::stator_residual(s, V, dI, p.motor);
    const double ref = std::max(V.head<3>().cwiseAbs().maxCoeff(), 1.0);
    worst_recip = std::max(worst_recip, res.cwiseAbs().maxCoeff() / ref);
  }
  const double worst = std::max(worst_literal, worst_recip);
  return {worst <= 1e-10,
          fmt("max rel error %.2e (all six rows, literal coupling), %.2e (stator rows, reciprocal)",
              worst_literal, worst_recip)};
}

Outcome torque_identity() {
  std::mt19937_64 rng(404);
  const cemg::MotorParams m;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const cemg::State s = random_state(rng);
    const cemg::Vector6 I = s.head<6>();
    auto W = [&](double th) { return 0.5 * I.dot(cemg::inductance_matrix(th, m).L * I); };
    const double h = 1e-5;
    const double fd = (W(s[cemg::theta_r] + h) - W(s[cemg::theta_r] - h)) / (2 * h);
    const double te = cemg::electromagnetic_torque(s, m);
    worst = std::max(worst, std::abs(te - fd) / std::abs(fd));
  }
  return {worst <= 1e-6, fmt("max rel error vs co-energy derivative %.2e", worst)};
}

Outcome vmd_recovery() {
  const auto t0 = Clock::now();
  const double fs = 4000.0;
  const std::size_t n = 4000;
  std::vector<double> a(n), b(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    a[i] = std::sin(2 * kPi * 50 * t);
    b[i] = 0.5 * std::sin(2 * kPi * 200 * t);
    x[i] = a[i] + b[i];
  }
  vmd::VmdConfig c;
  c.K = 2;
  const auto r = vmd::vmd(x, fs, c);
  auto corr = [](const std::vector<double>& u, const std::vector<double>& v) {
    double uv = 0, uu = 0, vv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      uv += u[i] * v[i];
      uu += u[i] * u[i];
      vv += v[i] * v[i];
    }
    return uv / std::sqrt(uu * vv);
  };
  double recon = 0.0;
  for (std::size_t i = 0; i < n; ++i) recon = std::max(recon, std::abs(r.modes[0][i] + r.modes[1][i] + r.residual[i] - x[i]));
  const double f1 = std::abs(r.center_freqs_Hz[0] - 50) / 50, f2 = std::abs(r.center_freqs_Hz[1] - 200) / 200;
  const double c1 = corr(r.modes[0], a), c2 = corr(r.modes[1], b);
  const double secs = since(t0);
  return {f1 <= 0.02 && f2 <= 0.02 && c1 > 0.95 && c2 > 0.95 && recon <= 1e-12 && secs < 5.0,
          fmt("centers %.2f/%.2f Hz, corr %.4f/%.4f, reconstruction %.1e, %.2f s", r.center_freqs_Hz[0],
              r.center_freqs_Hz[1], c1, c2, recon, secs)};
}

Outcome tsa_arithmetic() {
  const std::size_t n = 400000;
  std::vector<double> x(n);
  double lo = 1e300, hi = 0.0;
  std::size_t V = 0, L = 0, len = 0;
  for (int seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    std::normal_distribution<double> g;
    for (auto& v : x) v = g(rng);
    const auto r = tsa::tsa(x, 100000.0, 25.0);
    V = r.period_samples;
    L = r.n_averages;
    len = r.averaged.size();
    double var = 0.0;
    for (double v : r.averaged) var += v * v;
    var /= static_cast<double>(r.averaged.size());
    lo = std::min(lo, 1.0 / var);
    hi = std::max(hi, 1.0 / var);
  }
  return {len == 4000 && L == 100 && V == 4000 && lo >= 70 && hi <= 130,
          fmt("length %zu, L=%zu, noise reduction over 50 seeds in [%.1f, %.1f]", len, L, lo, hi)};
}

Outcome le_oracles() {
  const auto t0 = Clock::now();
  std::vector<double> lg(5000);
  lg[0] = 0.1234;
  for (std::size_t i = 1; i < lg.size(); ++i) lg[i] = 4.0 * lg[i - 1] * (1.0 - lg[i - 1]);
  const double l1 = chaos::lyapunov(lg, 1.0).lambda_per_sample;
  std::vector<double> sn(5000);
  for (std::size_t i = 0; i < sn.size(); ++i) sn[i] = std::sin(0.173 * static_cast<double>(i));
  const double l2 = chaos::lyapunov(sn, 1.0).lambda_per_sample;
  const double secs = since(t0);
  return {l1 >= 0.62 && l1 <= 0.76 && std::abs(l2) < 0.01 && secs < 60.0,
          fmt("logistic %.4f (ln 2 = 0.6931), sine %.2e per sample, %.2f s", l1, l2, secs)};
}

Outcome cd_oracles() {
  std::vector<double> h(10000);
  double x = 0.1, y = 0.1;
  for (int i = 0; i < 1000; ++i) {
    const double xn = 1.0 - 1.4 * x * x + y;
    y = 0.3 * x;
    x = xn;
  }
  for (auto& v : h) {
    const double xn = 1.0 - 1.4 * x * x + y;
    y = 0.3 * x;
    x = xn;
    v = x;
  }
  const double cd_h = chaos::correlation_dimension(h).cd;

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  chaos::Embedding seg{3, 1, {}};
  for (int i = 0; i < 2000; ++i) {
    const double t = u(rng);
    seg.points.insert(seg.points.end(), {t, 2.0 * t - 1.0, 0.5 * t});
  }
  chaos::CdConfig sc;
  sc.theiler_window = 0;
  const double cd_s = chaos::correlation_dimension(seg, sc).cd;

  std::normal_distribution<double> g;
  std::vector<double> noise(5000);
  for (auto& v : noise) v = g(rng);
  const double cd_n = chaos::correlation_dimension(noise).cd;
  return {std::abs(cd_h - kHenonOracle) <= 0.1 && std::abs(cd_s - 1.0) <= 0.1 && std::abs(cd_n - 3.0) <= 0.3,
          fmt("Henon %.3f (oracle %.3f), segment %.3f, noise %.3f", cd_h, kHenonOracle, cd_s, cd_n)};
}

struct DeskRuns {
  bool ok = false;
  std::string error;
  double seconds_first = 0.0;
  double seconds_second = 0.0;
  bool identical = false;
  pipeline::TrendReport report;
  std::string report_text;
};

DeskRuns desk_runs() {
  DeskRuns d;
  try {
    const fs::path root = fs::temp_directory_path() / "gearcrack_acceptance";
    fs::remove_all(root);
    auto cfg = config::preset("desk");
    cfg.output_dir = root / "first";
    auto t0 = Clock::now();
    const auto m1 = pipeline::run(cfg);
    d.seconds_first = since(t0);
    cfg.output_dir = root / "second";
    t0 = Clock::now();
    const auto m2 = pipeline::run(cfg);
    d.seconds_second = since(t0);
    if (!m1.all_done() || !m2.all_done()) {
      d.error = "some desk cases failed";
      return d;
    }
    d.identical = io::read_text(root / "first" / "features.csv") == io::read_text(root / "second" / "features.csv");
    const auto records = pipeline::collect_features(root / "first", m1);
    d.report = pipeline::trend_report(cfg, records);
    d.report_text = io::read_text(root / "first" / "report.txt");
    d.ok = true;
  } catch (const std::exception& ex) {
    d.error = ex.what();
  }
  return d;
}

}  // namespace

int main() {
  int hard_failures = 0;
  int reported_failures = 0;
  auto line = [&](int id, const char* name, const Outcome& o) {
    std::cout << "criterion " << id << " [" << name << "]: " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail
              << std::endl;
  };
  auto check = [&](int id, const char* name, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    line(id, name, o);
    if (!o.pass) ++hard_failures;
  };

  check(1, "mesh stiffness ordering", tvms_ordering);
  check(2, "RK4 convergence order", rk4_order);
  check(3, "electrical equations vs scalar oracle", electrical_fidelity);
  check(4, "torque vs co-energy", torque_identity);
  check(5, "VMD two-tone recovery", vmd_recovery);
  check(6, "TSA arithmetic", tsa_arithmetic);
  check(7, "Lyapunov oracles", le_oracles);
  check(8, "correlation dimension oracles", cd_oracles);

  const DeskRuns d = desk_runs();
  if (!d.ok) {
    for (int id : {9, 10, 11}) line(id, "desk matrix", {false, "desk run failed: " + d.error});
    hard_failures += 3;
  } else {
    const auto& sp = d.report.sign_pattern;
    const bool reported_text = d.report_text.find("NOT REPRODUCED") != std::string::npos;
    Outcome o9{sp.reproduced, fmt("sign pattern held in %.0f%% of %zu cases at %.0f dB", 100.0 * sp.fraction,
                                  sp.cases.size(), sp.snr_db)};
    if (!o9.pass) o9.detail += "; not reproduced at desk scale, stated in report.txt";
    line(9, "trend A: LE sign pattern", o9);

    bool all_mono = !d.report.cd_families.empty();
    std::string fam;
    for (const auto& f : d.report.cd_families) {
      all_mono = all_mono && f.evaluated && f.non_increasing;
      fam += fmt("%s %.0f dB mode %d: %s; ", f.speed_load.c_str(), f.snr_db, f.mode,
                 f.non_increasing ? "non-increasing" : "not monotone");
    }
    Outcome o10{all_mono, fam};
    if (!o10.pass) o10.detail += "not reproduced at desk scale, stated in report.txt";
    line(10, "trend B: CD vs crack depth", o10);

    for (const Outcome* o : {&o9, &o10}) {
      if (o->pass) continue;
      if (reported_text) {
        ++reported_failures;
      } else {
        ++hard_failures;
      }
    }

    const double slowest = std::max(d.seconds_first, d.seconds_second);
    line(11, "end-to-end determinism",
         {d.identical && slowest < 900.0,
          fmt("feature tables byte-identical=%s, desk runs %.1f s and %.1f s", d.identical ? "yes" : "no",
              d.seconds_first, d.seconds_second)});
    if (!(d.identical && slowest < 900.0)) ++hard_failures;

    std::cout << "\n--- desk run report ---\n" << d.report_text << std::endl;
  }

  std::cout << "summary: " << hard_failures << " unexplained failure(s), " << reported_failures
            << " trend criterion failure(s) reported as not reproduced at desk scale" << std::endl;
  return hard_failures == 0 ? 0 : 1;
}
