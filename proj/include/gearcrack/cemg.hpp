#pragma once

// Coupled electromechanical gearbox: a three-phase induction machine in the
// abc frame drives a spur pinion through a flexible coupling; the pinion
// meshes with a loaded gear through the time-varying mesh stiffness.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gearcrack/tvms.hpp"

namespace gearcrack::cemg {

// How the rotor voltage equations couple to the stator currents.
//   reciprocal - rotor-to-stator block is the transpose of the stator-to-rotor
//                block (symmetric inductance matrix, energy-consistent).
//   literal    - rotor rows reuse the stator-row phase pattern verbatim, which
//                makes the matrix non-symmetric.
enum class RotorCoupling { reciprocal, literal };

struct MotorParams {
  double R_s = 0.435;
  double R_r = 0.435;
  double L_ss = 0.0482;
  double L_rr = 0.0482;
  double L_ms = 0.0462;
  int pole_pairs = 2;
  double supply_amplitude_V = 150.0;
  double supply_frequency_Hz = 50.0;
  RotorCoupling coupling = RotorCoupling::reciprocal;

  // Mechanical synchronous speed in rad/s.
  double synchronous_speed() const;
  void validate() const;
};

struct MechParams {
  double m_p = 4.0;
  double m_g = 10.0;
  double K_yp = 1.0e8;
  double K_yg = 1.0e8;
  double C_yp = 1.0e3;
  double C_yg = 1.0e3;
  double i_m = 0.01;
  double i_p = 2.0e-3;
  double i_g = 0.03;
  double K_t = 500.0;
  double C_t = 0.5;
  double r_p = 0.028567;
  double r_g = 0.072170;
  double B_v = 1.0e-3;
  double T_L = 2.8247;
  double M_p = 0.0;
  double M_g = 0.0;
  double zeta = 0.07;

  void validate() const;
};

struct SystemParams {
  MotorParams motor;
  MechParams mech;
  tvms::GearGeometry gear;
  std::size_t profile_samples = 1024;

  // Base radii in `mech` are set from the gear geometry.
  static SystemParams defaults();
  tvms::MeshDamping mesh_damping() const { return {mech.m_p, mech.m_g, mech.zeta}; }
  // Pinion shaft speed at synchronism times the pinion tooth count, in Hz.
  double nominal_mesh_frequency_Hz() const;
  void validate() const;
};

inline constexpr int kStateSize = 16;
using State = Eigen::Matrix<double, kStateSize, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

// State layout.
enum Var : int {
  I_as, I_bs, I_cs, I_ar, I_br, I_cr,
  y_p, y_g, dy_p, dy_g,
  theta_p, theta_g, theta_r,
  omega_p, omega_g, omega_r,
};

std::string_view state_name(int index);

struct Inductance {
  Matrix6 L;
  // Derivative with respect to the mechanical rotor angle.
  Matrix6 dL;
};

// theta_r is the mechanical rotor angle; the windings see pole_pairs * theta_r.
Inductance inductance_matrix(double theta_r, const MotorParams& motor);

double electromagnetic_torque(const State& s, const MotorParams& motor);

double mesh_force(const State& s, double k_t, double c_t, double r_p, double r_g);

Vector6 supply_voltages(double t, const MotorParams& motor);

State derivatives(const State& s, double t, const SystemParams& params,
                  const tvms::StiffnessProfile& profile);

struct SimMetadata {
  std::string params_hash;
  double crack_level = 0.0;
  std::uint64_t seed = 0;
};

class SimResult {
 public:
  double sample_rate_Hz = 0.0;
  std::vector<std::string> channel_names;
  std::vector<std::vector<double>> channels;
  SimMetadata metadata;

  std::size_t size() const { return channels.empty() ? 0 : channels.front().size(); }
  double time(std::size_t i) const { return static_cast<double>(i) / sample_rate_Hz; }
  std::span<const double> channel(std::string_view name) const;
  bool has_channel(std::string_view name) const;
};

// All state variables followed by these derived channels.
inline constexpr std::array<std::string_view, 3> kDerivedChannels{"ddy_p", "N", "T_e"};

// Fixed-step RK4 with dt = 1 / sample_rate. Sample 0 is the initial state.
SimResult simulate(const SystemParams& params, const tvms::StiffnessProfile& profile,
                   double duration_s, double sample_rate_Hz, const State& initial);

SimResult simulate(const SystemParams& params, const tvms::CrackSpec& crack, double duration_s,
                   double sample_rate_Hz, const State& initial = State::Zero());

// One RK4 step; exposed for step-size studies.
State rk4_step(const State& s, double t, double dt, const SystemParams& params,
               const tvms::StiffnessProfile& profile);

struct SteadyStateSummary {
  double mean_rotor_speed = 0.0;  // rad/s
  double mean_torque = 0.0;       // N m
  double mean_gear_speed = 0.0;   // rad/s
  double slip = 0.0;
  double speed_trend_per_s = 0.0;  // relative change of rotor speed per second
  bool converged = true;
};

// Statistics over the final half of the record.
SteadyStateSummary steady_state_summary(const SimResult& result, const MotorParams& motor);

}  // namespace gearcrack::cemg
