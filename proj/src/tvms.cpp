#include "gearcrack/tvms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <sstream>

#include "gearcrack/error.hpp"

namespace gearcrack::tvms {
namespace {

constexpr double kPi = std::numbers::pi;

double involute(double a) { return std::tan(a) - a; }

// Gauss-Legendre nodes/weights on [-1, 1], computed once by Newton iteration.
template <int N>
struct GaussLegendre {
  std::array<double, N> x{};
  std::array<double, N> w{};

  GaussLegendre() {
    for (int i = 0; i < N; ++i) {
      double z = std::cos(kPi * (i + 0.75) / (N + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = z;
        for (int k = 2; k <= N; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = N * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-15) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre<16>& gauss() {
  static const GaussLegendre<16> rule;
  return rule;
}

// Integrates f over [a, b] with `pieces` equal sub-intervals.
template <typename F>
double integrate(F&& f, double a, double b, int pieces = 4) {
  if (!(b > a)) return 0.0;
  const auto& g = gauss();
  const double step = (b - a) / pieces;
  double sum = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double lo = a + p * step;
    const double half = 0.5 * step;
    const double mid = lo + half;
    for (std::size_t i = 0; i < g.x.size(); ++i) sum += g.w[i] * f(mid + half * g.x[i]);
  }
  return sum * 0.5 * step;
}

// Involute tooth with a radial flank below the base circle. Coordinates:
// X along the tooth centerline from the wheel centre, H the half thickness.
class ToothShape {
 public:
  ToothShape(const GearGeometry& g, Wheel w)
      : rb_(g.base_radius(w)),
        rf_(g.root_radius(w)),
        ra_(g.addendum_radius(w)),
        beta_b_(kPi / (2.0 * g.teeth(w)) + involute(g.pressure_angle_rad)),
        x_root_(X(rf_)) {}

  double base_radius() const { return rb_; }
  double root_radius() const { return rf_; }
  double tip_radius() const { return ra_; }

  double pressure_angle(double r) const { return r > rb_ ? std::acos(rb_ / r) : 0.0; }

  double beta(double r) const {
    if (r <= rb_) return beta_b_;
    return beta_b_ - involute(std::acos(rb_ / r));
  }

  double X(double r) const { return r * std::cos(beta(r)); }
  double H(double r) const { return r * std::sin(beta(r)); }

  double dXdr(double r) const {
    const double b = beta(r);
    if (r <= rb_) return std::cos(b);
    const double dbeta = -std::sqrt(r * r - rb_ * rb_) / (r * rb_);
    return std::cos(b) - r * std::sin(b) * dbeta;
  }

  // Distance from the root section along the centerline.
  double x(double r) const { return X(r) - x_root_; }

  double r_of_x(double xv) const {
    double lo = rf_;
    double hi = ra_;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * ra_; ++i) {
      const double mid = 0.5 * (lo + hi);
      (x(mid) < xv ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  double rb_;
  double rf_;
  double ra_;
  double beta_b_;
  double x_root_;
};

// Straight root crack starting on the loaded flank at the root section.
struct CrackGeometry {
  bool present = false;
  double x_tip = 0.0;
  double y_tip = 0.0;
  double r_tip = 0.0;
};

CrackGeometry crack_geometry(const ToothShape& shape, const CrackSpec& crack) {
  CrackGeometry out;
  if (crack.depth_fraction <= 0.0) return out;
  const double rf = shape.root_radius();
  const double ra = shape.tip_radius();
  const double h_root = shape.H(rf);
  const double slope = std::tan(crack.crack_angle_rad);  // drop in y per unit x
  auto inside = [&](double r) {
    const double y = h_root - shape.x(r) * slope;
    const double h = shape.H(r);
    return y > -h && y < h;
  };
  // Scan upward for the first exit of the crack line from the tooth section.
  constexpr int kScan = 4000;
  double r_exit = ra;
  double r_prev = rf;
  for (int i = 1; i <= kScan; ++i) {
    const double r = rf + (ra - rf) * i / kScan;
    if (!inside(r)) {
      double lo = r_prev;
      double hi = r;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (inside(mid) ? lo : hi) = mid;
      }
      r_exit = 0.5 * (lo + hi);
      break;
    }
    r_prev = r;
  }
  const double x_exit = shape.x(r_exit);
  const double chord = x_exit / std::cos(crack.crack_angle_rad);
  const double depth = crack.depth_fraction * chord;
  out.present = true;
  out.x_tip = depth * std::cos(crack.crack_angle_rad);
  out.y_tip = h_root - depth * std::sin(crack.crack_angle_rad);
  out.r_tip = shape.r_of_x(out.x_tip);
  return out;
}

// Profiles evaluate the same crack thousands of times; the exit scan is the
// expensive part, so the last result per thread is kept.
const CrackGeometry& cached_crack_geometry(const GearGeometry& g, const ToothShape& shape,
                                           const CrackSpec& crack) {
  struct Entry {
    std::array<double, 7> key{};
    CrackGeometry value;
    bool valid = false;
  };
  thread_local Entry last;
  const std::array<double, 7> key{static_cast<double>(g.teeth_pinion), g.module_mm, g.pressure_angle_rad,
                                   g.addendum_coeff, g.dedendum_coeff, crack.depth_fraction,
                                   crack.crack_angle_rad};
  if (!last.valid || last.key != key) {
    last.value = crack_geometry(shape, crack);
    last.key = key;
    last.valid = true;
  }
  return last.value;
}

struct SainsotFit {
  double a, b, c, d, e, f;
  double eval(double hf, double theta) const {
    return a / (theta * theta) + b * hf * hf + c * hf / theta + d / theta + e * hf + f;
  }
};

constexpr SainsotFit kFitL{-5.574e-5, -1.9986e-3, -2.3015e-4, 4.7702e-3, 0.0271, 6.8045};
constexpr SainsotFit kFitM{60.111e-5, 28.100e-3, -83.431e-4, -9.9256e-3, 0.1624, 0.9086};
constexpr SainsotFit kFitP{-50.952e-5, 185.50e-3, 0.0538e-4, 53.300e-3, 0.2895, 0.9236};
constexpr SainsotFit kFitQ{-6.2042e-5, 9.0889e-3, -4.0964e-4, 7.8297e-3, -0.1472, 0.6904};

ToothDeflection deflect(const GearGeometry& g, const CrackSpec& crack, Wheel wheel,
                        double contact_radius, double force, ContactMode mode) {
  const ToothShape shape(g, wheel);
  const CrackGeometry cg =
      wheel == Wheel::pinion ? cached_crack_geometry(g, shape, crack) : CrackGeometry{};

  const double E = g.youngs_modulus_Pa;
  const double G = g.shear_modulus_Pa();
  const double L = g.face_width_m;
  const double rc = contact_radius;
  const double alpha1 = shape.pressure_angle(rc) - shape.beta(rc);
  const double ca = std::cos(alpha1);
  const double sa = std::sin(alpha1);
  const double d = shape.x(rc);
  const double hc = shape.H(rc);

  auto height = [&](double r) {
    const double h = shape.H(r);
    double upper = h;
    if (cg.present && r <= cg.r_tip) upper = std::min(h, cg.y_tip);
    const double full = h + upper;
    if (!(full > 0.0)) throw SingularGeometryError("tooth section vanishes at the crack");
    return full;
  };

  auto bending = [&](double r) {
    const double hh = height(r);
    const double inertia = hh * hh * hh * L / 12.0;
    const double arm = (d - shape.x(r)) * ca - hc * sa;
    return arm * arm / (E * inertia) * shape.dXdr(r);
  };
  auto shear = [&](double r) { return 1.2 * ca * ca / (G * height(r) * L) * shape.dXdr(r); };
  auto axial = [&](double r) { return sa * sa / (E * height(r) * L) * shape.dXdr(r); };

  // Integration breakpoints: base circle and crack tip.
  std::vector<double> cuts{shape.root_radius()};
  if (shape.base_radius() > shape.root_radius() && shape.base_radius() < rc)
    cuts.push_back(shape.base_radius());
  if (cg.present && cg.r_tip > shape.root_radius() && cg.r_tip < rc) cuts.push_back(cg.r_tip);
  cuts.push_back(rc);
  std::sort(cuts.begin(), cuts.end());

  double cb = 0.0;
  double cs = 0.0;
  double cax = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    cb += integrate(bending, cuts[i], cuts[i + 1]);
    cs += integrate(shear, cuts[i], cuts[i + 1]);
    cax += integrate(axial, cuts[i], cuts[i + 1]);
  }

  // Fillet foundation (Sainsot et al.).
  const double rf = shape.root_radius();
  const double theta_f = shape.beta(rf);
  const double hf = rf / g.bore_radius(wheel);
  const double sf = 2.0 * shape.H(rf);
  const double uf = d - hc * std::tan(alpha1);
  const double ratio = uf / sf;
  const double ta = std::tan(alpha1);
  const double cf = ca * ca / (E * L) *
                    (kFitL.eval(hf, theta_f) * ratio * ratio + kFitM.eval(hf, theta_f) * ratio +
                     kFitP.eval(hf, theta_f) * (1.0 + kFitQ.eval(hf, theta_f) * ta * ta));

  ToothDeflection out;
  out.bending = force * cb;
  out.shear = force * cs;
  out.axial = force * cax;
  out.fillet = force * cf;
  out.coupling = mode == ContactMode::double_ ? g.coupling_fraction * out.fillet : 0.0;
  return out;
}

double wheel_contact_radius(const ContactPoint& cp, Wheel w) {
  return w == Wheel::pinion ? cp.radius_pinion_m : cp.radius_gear_m;
}

double reduce_angle(double angle, double period) {
  double r = angle - period * std::floor(angle / period);
  if (r >= period || r < 0.0) r = 0.0;
  return r;
}

}  // namespace

const char* to_string(Region region) { return region == Region::single ? "single" : "double"; }

double GearGeometry::pitch_radius(Wheel w) const { return 0.5 * module_m() * teeth(w); }

double GearGeometry::base_radius(Wheel w) const {
  return pitch_radius(w) * std::cos(pressure_angle_rad);
}

double GearGeometry::addendum_radius(Wheel w) const {
  return pitch_radius(w) + addendum_coeff * module_m();
}

double GearGeometry::root_radius(Wheel w) const {
  return pitch_radius(w) - dedendum_coeff * module_m();
}

double GearGeometry::bore_radius(Wheel w) const {
  return w == Wheel::pinion ? bore_radius_pinion_m : bore_radius_gear_m;
}

double GearGeometry::shear_modulus_Pa() const {
  return youngs_modulus_Pa / (2.0 * (1.0 + poisson_ratio));
}

double GearGeometry::mesh_period_rad() const { return 2.0 * kPi / teeth_pinion; }

double GearGeometry::base_pitch_m() const {
  return 2.0 * kPi * base_radius(Wheel::pinion) / teeth_pinion;
}

PathOfContact path_of_contact(const GearGeometry& g) {
  const double rbp = g.base_radius(Wheel::pinion);
  const double rbg = g.base_radius(Wheel::gear);
  const double rap = g.addendum_radius(Wheel::pinion);
  const double rag = g.addendum_radius(Wheel::gear);
  PathOfContact p;
  p.tangency_span_m = (rbp + rbg) * std::tan(g.pressure_angle_rad);
  p.end_m = std::sqrt(rap * rap - rbp * rbp);
  p.start_m = p.tangency_span_m - std::sqrt(rag * rag - rbg * rbg);
  p.base_radius_pinion_m = rbp;
  return p;
}

double GearGeometry::contact_ratio() const {
  const PathOfContact p = path_of_contact(*this);
  return (p.end_m - p.start_m) / base_pitch_m();
}

void GearGeometry::validate() const {
  if (teeth_pinion < 12 || teeth_gear < 12) throw DomainError("tooth counts must be >= 12");
  if (!(pressure_angle_rad > 0.0 && pressure_angle_rad < kPi / 4.0))
    throw DomainError("pressure angle must lie in (0, pi/4)");
  if (!(module_mm > 0.0 && face_width_m > 0.0 && youngs_modulus_Pa > 0.0))
    throw DomainError("module, face width and Young's modulus must be positive");
  if (!(poisson_ratio > 0.0 && poisson_ratio < 0.5))
    throw DomainError("Poisson ratio must lie in (0, 0.5)");
  if (!(nominal_force_N > 0.0)) throw DomainError("nominal force must be positive");
  if (!(coupling_fraction >= 0.0)) throw DomainError("coupling fraction must be >= 0");
  for (Wheel w : {Wheel::pinion, Wheel::gear}) {
    if (!(root_radius(w) > bore_radius(w) && bore_radius(w) > 0.0))
      throw SingularGeometryError("bore radius must lie inside the root circle");
  }
  const PathOfContact p = path_of_contact(*this);
  if (p.start_m < 0.0) throw SingularGeometryError("contact starts below the pinion base circle");
  if (p.end_m > p.tangency_span_m)
    throw SingularGeometryError("contact ends below the gear base circle");
  const double eps = contact_ratio();
  if (!(eps > 1.0 && eps < 2.0)) {
    std::ostringstream os;
    os << "contact ratio " << eps << " outside (1, 2)";
    throw SingularGeometryError(os.str());
  }
}

void CrackSpec::validate() const {
  if (!(depth_fraction >= 0.0 && depth_fraction < 1.0))
    throw DomainError("crack depth fraction must lie in [0, 1)");
  if (!(crack_angle_rad > 0.0 && crack_angle_rad < kPi / 2.0))
    throw DomainError("crack angle must lie in (0, pi/2)");
}

ContactPoint contact_point(const GearGeometry& g, double engagement_angle) {
  const PathOfContact p = path_of_contact(g);
  const double window = p.engagement_window_rad();
  if (!(engagement_angle >= 0.0 && engagement_angle <= window * (1.0 + 1e-12))) {
    std::ostringstream os;
    os << "engagement angle " << engagement_angle << " outside [0, " << window << "]";
    throw OutOfRangeError(os.str());
  }
  const double s = std::min(p.start_m + p.base_radius_pinion_m * engagement_angle, p.end_m);
  const double rbp = g.base_radius(Wheel::pinion);
  const double rbg = g.base_radius(Wheel::gear);
  return {std::hypot(rbp, s), std::hypot(rbg, p.tangency_span_m - s)};
}

ToothDeflection tooth_deflection(const GearGeometry& g, const CrackSpec& crack, Wheel wheel,
                                 double engagement_angle, double force_N, ContactMode mode) {
  if (!(force_N >= 0.0)) throw DomainError("tooth force must be non-negative");
  const ContactPoint cp = contact_point(g, engagement_angle);
  return deflect(g, crack, wheel, wheel_contact_radius(cp, wheel), force_N, mode);
}

ToothStiffness tooth_stiffness(const GearGeometry& g, const CrackSpec& crack,
                               double engagement_angle, double force_N, ContactMode mode) {
  const ContactPoint cp = contact_point(g, engagement_angle);
  if (!(force_N >= 0.0)) throw DomainError("tooth force must be non-negative");
  ToothStiffness k;
  for (Wheel w : {Wheel::pinion, Wheel::gear}) {
    const double delta =
        deflect(g, crack, w, wheel_contact_radius(cp, w), force_N, mode).total();
    if (!(delta > 0.0) || !std::isfinite(delta))
      throw SingularGeometryError("zero tooth deflection; stiffness undefined");
    (w == Wheel::pinion ? k.pinion : k.gear) = force_N / delta;
  }
  return k;
}

double hertz_stiffness(const GearGeometry& g, double force_N) {
  if (!(force_N > 0.0)) throw DomainError("Hertzian linearization force must be positive");
  return std::pow(g.youngs_modulus_Pa, 0.9) * std::pow(g.face_width_m, 0.8) *
         std::pow(force_N, 0.1) / 1.275;
}

MeshPoint mesh_point(const GearGeometry& g, const CrackSpec& crack, double mesh_angle) {
  const double period = g.mesh_period_rad();
  const double theta = reduce_angle(mesh_angle, period);
  const double window = path_of_contact(g).engagement_window_rad();
  const double force = g.nominal_force_N;

  MeshPoint mp;
  mp.k_hertz = hertz_stiffness(g, force);
  const bool two_pairs = theta + period <= window;
  mp.region = two_pairs ? Region::double_ : Region::single;
  const ContactMode mode = two_pairs ? ContactMode::double_ : ContactMode::single;

  auto series = [&](const ToothStiffness& t) {
    return 1.0 / (1.0 / t.pinion + 1.0 / t.gear + 1.0 / mp.k_hertz);
  };
  mp.teeth1 = tooth_stiffness(g, crack, theta, force, mode);
  mp.k_pair1 = series(mp.teeth1);
  if (two_pairs) {
    mp.teeth2 = tooth_stiffness(g, crack, theta + period, force, mode);
    mp.k_pair2 = series(mp.teeth2);
  }
  mp.k_total = mp.k_pair1 + mp.k_pair2;
  return mp;
}

double total_mesh_stiffness(const GearGeometry& g, const CrackSpec& crack, double mesh_angle) {
  return mesh_point(g, crack, mesh_angle).k_total;
}

double mesh_damping(double k_total, double m_p, double m_g, double zeta) {
  if (!(m_p > 0.0 && m_g > 0.0)) throw DomainError("gear masses must be positive");
  if (!(k_total >= 0.0)) throw DomainError("mesh stiffness must be non-negative");
  if (!(zeta >= 0.0)) throw DomainError("damping ratio must be non-negative");
  return 2.0 * zeta * std::sqrt(k_total * (m_p * m_g) / (m_p + m_g));
}

StiffnessSample StiffnessProfile::at(double mesh_angle) const {
  const double theta = reduce_angle(mesh_angle, period_rad);
  const double pos = theta / period_rad * static_cast<double>(size() - 1);
  std::size_t i = static_cast<std::size_t>(pos);
  if (i >= size() - 1) i = size() - 2;
  const double frac = pos - static_cast<double>(i);
  return {k_total_N_per_m[i] + frac * (k_total_N_per_m[i + 1] - k_total_N_per_m[i]),
          c_total_Ns_per_m[i] + frac * (c_total_Ns_per_m[i + 1] - c_total_Ns_per_m[i])};
}

StiffnessProfile StiffnessProfile::constant(double k, double c, double period,
                                            std::size_t samples) {
  StiffnessProfile p;
  p.period_rad = period;
  for (std::size_t i = 0; i < samples; ++i) {
    p.mesh_angle_rad.push_back(i + 1 == samples ? period : period * i / (samples - 1));
    p.k_total_N_per_m.push_back(k);
    p.c_total_Ns_per_m.push_back(c);
    p.region.push_back(Region::single);
  }
  return p;
}

void StiffnessProfile::write_csv(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "mesh_angle_rad,k_total,c_total,region\n";
  for (std::size_t i = 0; i < size(); ++i) {
    os << mesh_angle_rad[i] << ',' << k_total_N_per_m[i] << ',' << c_total_Ns_per_m[i] << ','
       << to_string(region[i]) << '\n';
  }
  os.precision(old);
}

StiffnessProfile build_profile(const GearGeometry& g, const CrackSpec& crack,
                               std::size_t samples_per_period, const MeshDamping& damping) {
  if (samples_per_period < 64) throw DomainError("profile needs at least 64 samples per period");
  g.validate();
  crack.validate();
  StiffnessProfile p;
  p.period_rad = g.mesh_period_rad();
  const std::size_t n = samples_per_period;
  p.mesh_angle_rad.resize(n);
  p.k_total_N_per_m.resize(n);
  p.c_total_Ns_per_m.resize(n);
  p.region.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = i + 1 == n ? p.period_rad : p.period_rad * i / (n - 1);
    const MeshPoint mp = mesh_point(g, crack, theta);
    p.mesh_angle_rad[i] = theta;
    p.k_total_N_per_m[i] = mp.k_total;
    p.c_total_Ns_per_m[i] = mesh_damping(mp.k_total, damping.m_p, damping.m_g, damping.zeta);
    p.region[i] = mp.region;
  }
  return p;
}

}  // namespace gearcrack::tvms
