#include "gearcrack/cemg.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gearcrack/error.hpp"

namespace gearcrack::cemg {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kThird = 2.0 * kPi / 3.0;

constexpr std::array<std::string_view, kStateSize> kStateNames{
    "I_as", "I_bs", "I_cs", "I_ar", "I_br", "I_cr", "y_p", "y_g",
    "dy_p", "dy_g", "theta_p", "theta_g", "theta_r", "omega_p", "omega_g", "omega_r"};

struct Accelerations {
  double N;
  double ddy_p;
  double ddy_g;
  double ddtheta_p;
  double ddtheta_g;
  double ddtheta_r;
};

Accelerations mechanics(const State& s, double T_e, const MechParams& m,
                        const tvms::StiffnessSample& mesh) {
  Accelerations a{};
  a.N = mesh_force(s, mesh.k, mesh.c, m.r_p, m.r_g);
  a.ddy_p = (-m.K_yp * s[y_p] - m.C_yp * s[dy_p] - a.N) / m.m_p;
  a.ddy_g = (-m.K_yg * s[y_g] - m.C_yg * s[dy_g] + a.N) / m.m_g;
  a.ddtheta_p = (m.r_p * a.N - m.K_t * (s[theta_p] - s[theta_r]) -
                 m.C_t * (s[omega_p] - s[omega_r]) + m.M_p) / m.i_p;
  a.ddtheta_g = (-m.r_g * a.N + m.M_g - m.T_L - m.B_v * s[omega_g]) / m.i_g;
  a.ddtheta_r = (-m.K_t * (s[theta_r] - s[theta_p]) - m.C_t * (s[omega_r] - s[omega_p]) -
                 m.B_v * s[omega_r] + T_e) / m.i_m;
  return a;
}

void check_finite(const State& s, std::size_t step, double t) {
  for (int i = 0; i < kStateSize; ++i) {
    if (!std::isfinite(s[i])) {
      std::ostringstream os;
      os << "simulation diverged at step " << step << " (t=" << t << " s): channel "
         << kStateNames[i] << " is not finite";
      throw DivergenceError(os.str());
    }
  }
}

}  // namespace

std::string_view state_name(int index) { return kStateNames.at(index); }

double MotorParams::synchronous_speed() const {
  return 2.0 * kPi * supply_frequency_Hz / pole_pairs;
}

void MotorParams::validate() const {
  if (!(R_s > 0.0 && R_r > 0.0)) throw DomainError("winding resistances must be positive");
  if (!(L_ms > 0.0 && L_ss > L_ms && L_rr > L_ms))
    throw DomainError("inductances must satisfy L_ss > L_ms > 0 and L_rr > L_ms");
  if (pole_pairs < 1) throw DomainError("pole_pairs must be >= 1");
  if (!(supply_frequency_Hz > 0.0 && supply_amplitude_V >= 0.0))
    throw DomainError("supply frequency must be positive and amplitude non-negative");
  // The inductance matrix must stay invertible for every rotor position.
  for (int i = 0; i < 360; ++i) {
    const double theta = 2.0 * kPi * i / (360.0 * pole_pairs);
    const Matrix6 L = inductance_matrix(theta, *this).L;
    const Eigen::FullPivLU<Matrix6> lu(L);
    if (lu.rank() < 6 || std::abs(lu.determinant()) < 1e-30)
      throw DomainError("inductance matrix is singular at some rotor angle");
  }
}

void MechParams::validate() const {
  for (double v : {m_p, m_g, K_yp, K_yg, i_m, i_p, i_g, K_t, r_p, r_g}) {
    if (!(v > 0.0)) throw DomainError("masses, stiffnesses, inertias and radii must be positive");
  }
  for (double v : {C_yp, C_yg, C_t, B_v, zeta}) {
    if (!(v >= 0.0)) throw DomainError("damping coefficients must be non-negative");
  }
  if (!std::isfinite(T_L) || !std::isfinite(M_p) || !std::isfinite(M_g))
    throw DomainError("load and friction moments must be finite");
}

SystemParams SystemParams::defaults() {
  SystemParams p;
  p.mech.r_p = p.gear.base_radius(tvms::Wheel::pinion);
  p.mech.r_g = p.gear.base_radius(tvms::Wheel::gear);
  return p;
}

double SystemParams::nominal_mesh_frequency_Hz() const {
  return motor.supply_frequency_Hz / motor.pole_pairs * gear.teeth_pinion;
}

void SystemParams::validate() const {
  motor.validate();
  mech.validate();
  gear.validate();
  auto close = [](double a, double b) { return std::abs(a - b) <= 0.01 * std::abs(b); };
  if (!close(mech.r_p, gear.base_radius(tvms::Wheel::pinion)) ||
      !close(mech.r_g, gear.base_radius(tvms::Wheel::gear)))
    throw DomainError("r_p / r_g disagree with the gear base radii by more than 1%");
  if (profile_samples < 64) throw DomainError("profile_samples must be >= 64");
}

Inductance inductance_matrix(double theta_r, const MotorParams& m) {
  const double P = m.pole_pairs;
  const double th = P * theta_r;
  Inductance out;
  out.L.setZero();
  out.dL.setZero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double self_s = i == j ? m.L_ss : -0.5 * m.L_ms;
      const double self_r = i == j ? m.L_rr : -0.5 * m.L_ms;
      out.L(i, j) = self_s;
      out.L(3 + i, 3 + j) = self_r;
      const double arg = th + (j - i) * kThird;
      out.L(i, 3 + j) = m.L_ms * std::cos(arg);
      out.dL(i, 3 + j) = -P * m.L_ms * std::sin(arg);
    }
  }
  const Eigen::Matrix3d sr = out.L.topRightCorner<3, 3>();
  const Eigen::Matrix3d dsr = out.dL.topRightCorner<3, 3>();
  if (m.coupling == RotorCoupling::reciprocal) {
    out.L.bottomLeftCorner<3, 3>() = sr.transpose();
    out.dL.bottomLeftCorner<3, 3>() = dsr.transpose();
  } else {
    out.L.bottomLeftCorner<3, 3>() = sr;
    out.dL.bottomLeftCorner<3, 3>() = dsr;
  }
  return out;
}

double electromagnetic_torque(const State& s, const MotorParams& m) {
  const double th = m.pole_pairs * s[theta_r];
  const double g0 = s[I_as] * s[I_ar] + s[I_bs] * s[I_br] + s[I_cs] * s[I_cr];
  const double gm = s[I_as] * s[I_cr] + s[I_bs] * s[I_ar] + s[I_cs] * s[I_br];
  const double gp = s[I_as] * s[I_br] + s[I_bs] * s[I_cr] + s[I_cs] * s[I_ar];
  return -m.pole_pairs * m.L_ms *
         (g0 * std::sin(th) + gm * std::sin(th - kThird) + gp * std::sin(th + kThird));
}

double mesh_force(const State& s, double k_t, double c_t, double r_p, double r_g) {
  const double rel = (s[y_p] - s[y_g]) - (r_p * s[theta_p] - r_g * s[theta_g]);
  const double rel_dot = (s[dy_p] - s[dy_g]) - (r_p * s[omega_p] - r_g * s[omega_g]);
  return k_t * rel + c_t * rel_dot;
}

Vector6 supply_voltages(double t, const MotorParams& m) {
  const double wt = 2.0 * kPi * m.supply_frequency_Hz * t;
  Vector6 v = Vector6::Zero();
  for (int k = 0; k < 3; ++k) v[k] = m.supply_amplitude_V * std::cos(wt - k * kThird);
  return v;
}

State derivatives(const State& s, double t, const SystemParams& p,
                  const tvms::StiffnessProfile& profile) {
  const MotorParams& m = p.motor;
  const Inductance ind = inductance_matrix(s[theta_r], m);
  const Vector6 I = s.head<6>();
  Vector6 R;
  R << m.R_s, m.R_s, m.R_s, m.R_r, m.R_r, m.R_r;
  const Vector6 rhs =
      supply_voltages(t, m) - R.cwiseProduct(I) - s[omega_r] * (ind.dL * I);
  const Eigen::PartialPivLU<Matrix6> lu(ind.L);
  const Vector6 dI = lu.solve(rhs);
  // A non-finite state propagates so the caller can report where it diverged.
  if (!dI.allFinite() && s.allFinite() && rhs.allFinite()) {
    throw DomainError("inductance matrix is singular; check motor parameters");
  }

  const double T_e = electromagnetic_torque(s, m);
  const Accelerations a = mechanics(s, T_e, p.mech, profile.at(s[theta_p]));

  State ds;
  ds.head<6>() = dI;
  ds[y_p] = s[dy_p];
  ds[y_g] = s[dy_g];
  ds[dy_p] = a.ddy_p;
  ds[dy_g] = a.ddy_g;
  ds[theta_p] = s[omega_p];
  ds[theta_g] = s[omega_g];
  ds[theta_r] = s[omega_r];
  ds[omega_p] = a.ddtheta_p;
  ds[omega_g] = a.ddtheta_g;
  ds[omega_r] = a.ddtheta_r;
  return ds;
}

State rk4_step(const State& s, double t, double dt, const SystemParams& p,
               const tvms::StiffnessProfile& profile) {
  const State k1 = derivatives(s, t, p, profile);
  const State k2 = derivatives(s + 0.5 * dt * k1, t + 0.5 * dt, p, profile);
  const State k3 = derivatives(s + 0.5 * dt * k2, t + 0.5 * dt, p, profile);
  const State k4 = derivatives(s + dt * k3, t + dt, p, profile);
  return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

bool SimResult::has_channel(std::string_view name) const {
  for (const auto& n : channel_names) {
    if (n == name) return true;
  }
  return false;
}

std::span<const double> SimResult::channel(std::string_view name) const {
  for (std::size_t i = 0; i < channel_names.size(); ++i) {
    if (channel_names[i] == name) return channels[i];
  }
  throw OutOfRangeError("no channel named " + std::string(name));
}

SimResult simulate(const SystemParams& p, const tvms::StiffnessProfile& profile,
                   double duration_s, double sample_rate_Hz, const State& initial) {
  if (!(duration_s > 0.0)) throw DomainError("duration must be positive");
  if (!(sample_rate_Hz >= 20.0 * p.nominal_mesh_frequency_Hz())) {
    std::ostringstream os;
    os << "sample rate " << sample_rate_Hz << " Hz is below 20x the mesh frequency ("
       << p.nominal_mesh_frequency_Hz() << " Hz)";
    throw DomainError(os.str());
  }
  if (!initial.allFinite()) throw DomainError("initial state must be finite");

  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_Hz));
  const double dt = 1.0 / sample_rate_Hz;

  SimResult r;
  r.sample_rate_Hz = sample_rate_Hz;
  for (int i = 0; i < kStateSize; ++i) r.channel_names.emplace_back(kStateNames[i]);
  for (auto d : kDerivedChannels) r.channel_names.emplace_back(d);
  r.channels.assign(r.channel_names.size(), std::vector<double>(n));

  State s = initial;
  for (std::size_t step = 0; step < n; ++step) {
    const double t = static_cast<double>(step) * dt;
    if (step > 0) {
      s = rk4_step(s, t - dt, dt, p, profile);
      check_finite(s, step, t);
    }
    const double T_e = electromagnetic_torque(s, p.motor);
    const Accelerations a = mechanics(s, T_e, p.mech, profile.at(s[theta_p]));
    for (int i = 0; i < kStateSize; ++i) r.channels[i][step] = s[i];
    r.channels[kStateSize][step] = a.ddy_p;
    r.channels[kStateSize + 1][step] = a.N;
    r.channels[kStateSize + 2][step] = T_e;
  }
  return r;
}

SimResult simulate(const SystemParams& p, const tvms::CrackSpec& crack, double duration_s,
                   double sample_rate_Hz, const State& initial) {
  p.validate();
  const tvms::StiffnessProfile profile =
      tvms::build_profile(p.gear, crack, p.profile_samples, p.mesh_damping());
  SimResult r = simulate(p, profile, duration_s, sample_rate_Hz, initial);
  r.metadata.crack_level = crack.depth_fraction;
  return r;
}

SteadyStateSummary steady_state_summary(const SimResult& result, const MotorParams& motor) {
  const std::size_t n = result.size();
  if (!(static_cast<double>(n) / result.sample_rate_Hz > 1.0))
    throw DomainError("steady-state summary needs more than 1 s of data");
  const std::size_t first = n / 2;
  const auto w_r = result.channel("omega_r");
  const auto w_g = result.channel("omega_g");
  const auto te = result.channel("T_e");

  SteadyStateSummary out;
  double st = 0.0;
  double stt = 0.0;
  double sw = 0.0;
  double stw = 0.0;
  const double count = static_cast<double>(n - first);
  for (std::size_t i = first; i < n; ++i) {
    const double t = result.time(i);
    out.mean_rotor_speed += w_r[i];
    out.mean_gear_speed += w_g[i];
    out.mean_torque += te[i];
    st += t;
    stt += t * t;
    sw += w_r[i];
    stw += t * w_r[i];
  }
  out.mean_rotor_speed /= count;
  out.mean_gear_speed /= count;
  out.mean_torque /= count;
  const double slope = (count * stw - st * sw) / (count * stt - st * st);
  const double sync = motor.synchronous_speed();
  out.slip = (sync - out.mean_rotor_speed) / sync;
  out.speed_trend_per_s =
      out.mean_rotor_speed != 0.0 ? slope / std::abs(out.mean_rotor_speed) : 0.0;
  out.converged = std::abs(out.speed_trend_per_s) <= 0.01;
  return out;
}

}  // namespace gearcrack::cemg
