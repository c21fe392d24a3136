#pragma once

// Time-varying mesh stiffness of a spur-gear pair with a root crack on the
// pinion teeth, computed with the potential-energy method.
//
// Every tooth is treated as a cantilever of variable section along its
// centerline. The tooth-body deflection collects bending, shear and axial
// compression energy; the fillet-foundation term follows Sainsot's
// closed-form fit; contact compliance uses Palmgren's nonlinear line-contact
// law linearized at a nominal force.

#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <vector>

namespace gearcrack::tvms {

enum class Wheel { pinion, gear };

enum class Region { single, double_ };

const char* to_string(Region region);

// Gear pair geometry. Lengths in metres unless the name says otherwise.
struct GearGeometry {
  int teeth_pinion = 19;
  int teeth_gear = 48;
  double module_mm = 3.2;
  double pressure_angle_rad = 20.0 * std::numbers::pi / 180.0;
  double face_width_m = 0.016;
  double youngs_modulus_Pa = 2.068e11;
  double poisson_ratio = 0.3;
  double addendum_coeff = 1.0;
  double dedendum_coeff = 1.25;
  // Bore radii feed the fillet-foundation fit (ratio root radius / bore).
  double bore_radius_pinion_m = 0.0188;
  double bore_radius_gear_m = 0.05;
  // Force at which the Hertzian contact stiffness is linearized.
  double nominal_force_N = 100.0;
  // Structural coupling deflection as a fraction of the fillet deflection;
  // only active while two tooth pairs share the load.
  double coupling_fraction = 0.15;

  double module_m() const { return module_mm * 1e-3; }
  int teeth(Wheel w) const { return w == Wheel::pinion ? teeth_pinion : teeth_gear; }
  double pitch_radius(Wheel w) const;
  double base_radius(Wheel w) const;
  double addendum_radius(Wheel w) const;
  double root_radius(Wheel w) const;
  double bore_radius(Wheel w) const;
  double base_radius_pinion_m() const { return base_radius(Wheel::pinion); }
  double base_radius_gear_m() const { return base_radius(Wheel::gear); }
  double shear_modulus_Pa() const;

  // Pinion rotation covering one tooth pitch.
  double mesh_period_rad() const;
  double base_pitch_m() const;
  double contact_ratio() const;

  // Throws DomainError / SingularGeometryError when an invariant fails.
  void validate() const;
};

struct CrackSpec {
  double depth_fraction = 0.0;
  double crack_angle_rad = std::numbers::pi / 4.0;

  static CrackSpec healthy() { return {}; }
  void validate() const;
};

// Positions along the path of contact for one engagement cycle.
struct PathOfContact {
  double start_m = 0.0;        // distance from the pinion tangency point
  double end_m = 0.0;
  double tangency_span_m = 0.0;  // distance between the two base-circle tangency points
  double base_radius_pinion_m = 0.0;

  // Pinion rotation from first to last contact of one tooth pair.
  double engagement_window_rad() const { return (end_m - start_m) / base_radius_pinion_m; }
};

PathOfContact path_of_contact(const GearGeometry& geometry);

// Contact radii on each wheel for a tooth pair that has been engaged for
// `engagement_angle` of pinion rotation.
struct ContactPoint {
  double radius_pinion_m = 0.0;
  double radius_gear_m = 0.0;
};

ContactPoint contact_point(const GearGeometry& geometry, double engagement_angle);

enum class ContactMode { single, double_ };

struct ToothDeflection {
  double bending = 0.0;
  double shear = 0.0;
  double axial = 0.0;
  double fillet = 0.0;
  double coupling = 0.0;

  double tooth_body() const { return bending + shear + axial; }
  double total() const { return tooth_body() + fillet + coupling; }
};

// Deflection along the line of action of the `wheel` tooth carrying `force`
// at the given engagement angle. The crack is applied to pinion teeth only.
ToothDeflection tooth_deflection(const GearGeometry& geometry, const CrackSpec& crack,
                                 Wheel wheel, double engagement_angle, double force_N,
                                 ContactMode mode = ContactMode::single);

struct ToothStiffness {
  double pinion = 0.0;
  double gear = 0.0;
};

ToothStiffness tooth_stiffness(const GearGeometry& geometry, const CrackSpec& crack,
                               double engagement_angle, double force_N,
                               ContactMode mode = ContactMode::single);

double hertz_stiffness(const GearGeometry& geometry, double force_N);

struct MeshPoint {
  double k_total = 0.0;
  Region region = Region::single;
  // Series stiffness of each engaged pair; pair 2 is zero in single contact.
  double k_pair1 = 0.0;
  double k_pair2 = 0.0;
  ToothStiffness teeth1{};
  ToothStiffness teeth2{};
  double k_hertz = 0.0;
};

// Mesh angle is pinion rotation; it is reduced modulo the mesh period.
MeshPoint mesh_point(const GearGeometry& geometry, const CrackSpec& crack, double mesh_angle);
double total_mesh_stiffness(const GearGeometry& geometry, const CrackSpec& crack,
                            double mesh_angle);

// C = 2 zeta sqrt(K m_p m_g / (m_p + m_g)).
double mesh_damping(double k_total, double m_p, double m_g, double zeta);

struct MeshDamping {
  double m_p = 4.0;
  double m_g = 10.0;
  double zeta = 0.07;
};

struct StiffnessSample {
  double k = 0.0;
  double c = 0.0;
};

// Tabulated K and C over one closed mesh period: the last grid angle equals
// the period and repeats the first sample.
class StiffnessProfile {
 public:
  std::vector<double> mesh_angle_rad;
  std::vector<double> k_total_N_per_m;
  std::vector<double> c_total_Ns_per_m;
  std::vector<Region> region;
  double period_rad = 0.0;

  std::size_t size() const { return mesh_angle_rad.size(); }

  // Linear interpolation at an arbitrary pinion angle.
  StiffnessSample at(double mesh_angle) const;

  // Flat profile, used where a smooth right-hand side is needed.
  static StiffnessProfile constant(double k, double c, double period_rad,
                                   std::size_t samples = 64);

  void write_csv(std::ostream& os) const;
};

StiffnessProfile build_profile(const GearGeometry& geometry, const CrackSpec& crack,
                               std::size_t samples_per_period = 1024,
                               const MeshDamping& damping = {});

}  // namespace gearcrack::tvms
