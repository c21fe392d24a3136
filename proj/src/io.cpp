#include "gearcrack/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "gearcrack/error.hpp"

namespace gearcrack::io {

static_assert(std::endian::native == std::endian::little, "binary tables assume little-endian hosts");

namespace {

constexpr std::uint64_t kFnvPrime = 1099511628211ULL;
constexpr int kTableVersion = 1;

// Reads `key` if present; rejects keys the schema does not know.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  void opt(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& ex) {
      throw ConfigError(where_ + "." + key + ": " + ex.what());
    }
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

double deg(double rad) { return rad * 180.0 / std::numbers::pi; }
double rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t h) {
  for (unsigned char b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t seed) {
  return fnv1a(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(text.data()),
                                              text.size()),
               seed);
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string file_checksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::uint64_t h = 14695981039346656037ULL;
  std::vector<unsigned char> buf(1 << 16);
  while (in) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    h = fnv1a(std::span<const unsigned char>(buf.data(), static_cast<std::size_t>(in.gcount())), h);
  }
  return hex64(h);
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::span<const double> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return columns[i];
  }
  throw Error("no column named '" + std::string(name) + "'");
}

fs::path bin_path(const fs::path& base) { return base.string() + ".bin"; }
fs::path sidecar_path(const fs::path& base) { return base.string() + ".json"; }

void write_table(const Table& t, const fs::path& base) {
  for (const auto& c : t.columns) {
    if (c.size() != t.rows()) throw Error("table columns differ in length");
  }
  if (t.names.size() != t.columns.size()) throw Error("table names and columns differ in count");

  std::string bytes;
  bytes.reserve(t.rows() * t.columns.size() * sizeof(double));
  for (const auto& c : t.columns) {
    bytes.append(reinterpret_cast<const char*>(c.data()), c.size() * sizeof(double));
  }
  write_text(bin_path(base), bytes);

  json side;
  side["format"] = "gearcrack-table";
  side["version"] = kTableVersion;
  side["sample_rate_Hz"] = t.sample_rate_Hz;
  side["rows"] = t.rows();
  side["columns"] = t.names;
  side["checksum"] = file_checksum(bin_path(base));
  side["metadata"] = t.metadata;
  write_text(sidecar_path(base), side.dump(2) + "\n");
}

Table read_table(const fs::path& base) {
  json side;
  try {
    side = json::parse(read_text(sidecar_path(base)));
  } catch (const json::exception& ex) {
    throw Error(sidecar_path(base).string() + ": " + ex.what());
  }
  if (side.value("format", "") != "gearcrack-table" || side.value("version", 0) != kTableVersion) {
    throw Error(sidecar_path(base).string() + ": not a table sidecar");
  }
  const std::string expected = side.at("checksum").get<std::string>();
  const std::string actual = file_checksum(bin_path(base));
  if (expected != actual) {
    throw Error(bin_path(base).string() + ": checksum mismatch (expected " + expected + ", got " +
                actual + ")");
  }

  Table t;
  t.sample_rate_Hz = side.at("sample_rate_Hz").get<double>();
  t.names = side.at("columns").get<std::vector<std::string>>();
  t.metadata = side.value("metadata", json::object());
  const std::size_t rows = side.at("rows").get<std::size_t>();
  const std::string bytes = read_text(bin_path(base));
  if (bytes.size() != rows * t.names.size() * sizeof(double)) {
    throw Error(bin_path(base).string() + ": size does not match the sidecar");
  }
  t.columns.assign(t.names.size(), std::vector<double>(rows));
  for (std::size_t c = 0; c < t.names.size(); ++c) {
    std::memcpy(t.columns[c].data(), bytes.data() + c * rows * sizeof(double), rows * sizeof(double));
  }
  return t;
}

Table to_table(const cemg::SimResult& r, std::span<const std::string> channels) {
  Table t;
  t.sample_rate_Hz = r.sample_rate_Hz;
  if (channels.empty()) {
    t.names = r.channel_names;
    t.columns = r.channels;
  } else {
    for (const auto& name : channels) {
      const auto c = r.channel(name);
      t.names.push_back(name);
      t.columns.emplace_back(c.begin(), c.end());
    }
  }
  t.metadata["params_hash"] = r.metadata.params_hash;
  t.metadata["crack_level"] = r.metadata.crack_level;
  t.metadata["seed"] = r.metadata.seed;
  return t;
}

cemg::SimResult to_sim_result(const Table& t) {
  cemg::SimResult r;
  r.sample_rate_Hz = t.sample_rate_Hz;
  r.channel_names = t.names;
  r.channels = t.columns;
  r.metadata.params_hash = t.metadata.value("params_hash", "");
  r.metadata.crack_level = t.metadata.value("crack_level", 0.0);
  r.metadata.seed = t.metadata.value("seed", std::uint64_t{0});
  return r;
}

void write_csv(std::ostream& os, std::span<const std::string> header,
               std::span<const std::vector<double>> columns) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      os << (c ? "," : "") << format_double(columns[c][r]);
    }
    os << '\n';
  }
}

void write_csv(std::ostream& os, const cemg::SimResult& result) {
  write_csv(os, result.channel_names, result.channels);
}

void write_csv(std::ostream& os, const vmd::VmdResult& result, double sample_rate_Hz) {
  std::vector<std::string> header{"t"};
  std::vector<std::vector<double>> cols(1);
  const std::size_t n = result.residual.size();
  cols[0].resize(n);
  for (std::size_t i = 0; i < n; ++i) cols[0][i] = static_cast<double>(i) / sample_rate_Hz;
  for (std::size_t k = 0; k < result.modes.size(); ++k) {
    header.push_back("mode_" + std::to_string(k + 1));
    cols.push_back(result.modes[k]);
  }
  header.emplace_back("residual");
  cols.push_back(result.residual);
  write_csv(os, header, cols);
}

void write_csv(std::ostream& os, const tsa::TsaResult& result) {
  const std::size_t V = result.averaged.size();
  std::vector<double> angle(V);
  for (std::size_t i = 0; i < V; ++i) angle[i] = static_cast<double>(i) / static_cast<double>(V);
  const std::vector<std::string> header{"angle_fraction", "averaged_value"};
  const std::vector<std::vector<double>> cols{angle, result.averaged};
  write_csv(os, header, cols);
}

void write_csv(std::ostream& os, const signal::EnvelopeSpectrum& spectrum) {
  const std::vector<std::string> header{"freq_hz", "magnitude"};
  const std::vector<std::vector<double>> cols{spectrum.freq_Hz, spectrum.magnitude};
  write_csv(os, header, cols);
}

json sidecar(const cemg::SimResult& result) {
  return {{"sample_rate_Hz", result.sample_rate_Hz},
          {"rows", result.size()},
          {"channels", result.channel_names},
          {"params_hash", result.metadata.params_hash},
          {"crack_level", result.metadata.crack_level},
          {"seed", result.metadata.seed}};
}

json sidecar(const vmd::VmdResult& result) {
  return {{"center_freqs_Hz", result.center_freqs_Hz},
          {"iterations", result.iterations},
          {"final_update_norm", result.final_update_norm},
          {"converged", result.converged}};
}

json sidecar(const tsa::TsaResult& result) {
  return {{"V", result.period_samples},
          {"L", result.n_averages},
          {"residual_rms", result.residual_rms},
          {"drift_samples", result.drift_samples},
          {"drift_warning", result.drift_warning}};
}

json to_json(const cemg::SystemParams& p) {
  const auto& m = p.motor;
  const auto& k = p.mech;
  const auto& g = p.gear;
  json j;
  j["motor"] = {
      {"R_s_ohm", m.R_s},
      {"R_r_ohm", m.R_r},
      {"L_ss_H", m.L_ss},
      {"L_rr_H", m.L_rr},
      {"L_ms_H", m.L_ms},
      {"pole_pairs", m.pole_pairs},
      {"supply_amplitude_V", m.supply_amplitude_V},
      {"supply_frequency_Hz", m.supply_frequency_Hz},
      {"rotor_coupling", m.coupling == cemg::RotorCoupling::reciprocal ? "reciprocal" : "literal"},
  };
  j["mechanical"] = {
      {"m_p_kg", k.m_p},
      {"m_g_kg", k.m_g},
      {"K_yp_N_per_m", k.K_yp},
      {"K_yg_N_per_m", k.K_yg},
      {"C_yp_Ns_per_m", k.C_yp},
      {"C_yg_Ns_per_m", k.C_yg},
      {"i_m_kgm2", k.i_m},
      {"i_p_kgm2", k.i_p},
      {"i_g_kgm2", k.i_g},
      {"K_t_Nm_per_rad", k.K_t},
      {"C_t_Nms_per_rad", k.C_t},
      {"r_p_m", k.r_p},
      {"r_g_m", k.r_g},
      {"B_v_Nms_per_rad", k.B_v},
      {"T_L_Nm", k.T_L},
      {"M_p_Nm", k.M_p},
      {"M_g_Nm", k.M_g},
      {"mesh_damping_ratio", k.zeta},
  };
  j["gear"] = {
      {"teeth_pinion", g.teeth_pinion},
      {"teeth_gear", g.teeth_gear},
      {"module_mm", g.module_mm},
      {"pressure_angle_deg", deg(g.pressure_angle_rad)},
      {"face_width_m", g.face_width_m},
      {"youngs_modulus_Pa", g.youngs_modulus_Pa},
      {"poisson_ratio", g.poisson_ratio},
      {"addendum_coeff", g.addendum_coeff},
      {"dedendum_coeff", g.dedendum_coeff},
      {"bore_radius_pinion_m", g.bore_radius_pinion_m},
      {"bore_radius_gear_m", g.bore_radius_gear_m},
      {"hertz_linearization_force_N", g.nominal_force_N},
      {"coupling_fraction", g.coupling_fraction},
  };
  j["profile_samples"] = p.profile_samples;
  return j;
}

cemg::SystemParams system_params_from_json(const json& j) {
  cemg::SystemParams p = cemg::SystemParams::defaults();
  Reader top(j, "system");
  if (const json* mj = top.sub("motor")) {
    Reader r(*mj, "system.motor");
    auto& m = p.motor;
    r.opt("R_s_ohm", m.R_s);
    r.opt("R_r_ohm", m.R_r);
    r.opt("L_ss_H", m.L_ss);
    r.opt("L_rr_H", m.L_rr);
    r.opt("L_ms_H", m.L_ms);
    r.opt("pole_pairs", m.pole_pairs);
    r.opt("supply_amplitude_V", m.supply_amplitude_V);
    r.opt("supply_frequency_Hz", m.supply_frequency_Hz);
    std::string coupling = "reciprocal";
    r.opt("rotor_coupling", coupling);
    if (coupling == "reciprocal") {
      m.coupling = cemg::RotorCoupling::reciprocal;
    } else if (coupling == "literal") {
      m.coupling = cemg::RotorCoupling::literal;
    } else {
      throw ConfigError("system.motor.rotor_coupling: expected 'reciprocal' or 'literal'");
    }
    r.finish();
  }
  if (const json* kj = top.sub("mechanical")) {
    Reader r(*kj, "system.mechanical");
    auto& k = p.mech;
    r.opt("m_p_kg", k.m_p);
    r.opt("m_g_kg", k.m_g);
    r.opt("K_yp_N_per_m", k.K_yp);
    r.opt("K_yg_N_per_m", k.K_yg);
    r.opt("C_yp_Ns_per_m", k.C_yp);
    r.opt("C_yg_Ns_per_m", k.C_yg);
    r.opt("i_m_kgm2", k.i_m);
    r.opt("i_p_kgm2", k.i_p);
    r.opt("i_g_kgm2", k.i_g);
    r.opt("K_t_Nm_per_rad", k.K_t);
    r.opt("C_t_Nms_per_rad", k.C_t);
    r.opt("r_p_m", k.r_p);
    r.opt("r_g_m", k.r_g);
    r.opt("B_v_Nms_per_rad", k.B_v);
    r.opt("T_L_Nm", k.T_L);
    r.opt("M_p_Nm", k.M_p);
    r.opt("M_g_Nm", k.M_g);
    r.opt("mesh_damping_ratio", k.zeta);
    r.finish();
  }
  if (const json* gj = top.sub("gear")) {
    Reader r(*gj, "system.gear");
    auto& g = p.gear;
    r.opt("teeth_pinion", g.teeth_pinion);
    r.opt("teeth_gear", g.teeth_gear);
    r.opt("module_mm", g.module_mm);
    double alpha = deg(g.pressure_angle_rad);
    r.opt("pressure_angle_deg", alpha);
    g.pressure_angle_rad = rad(alpha);
    r.opt("face_width_m", g.face_width_m);
    r.opt("youngs_modulus_Pa", g.youngs_modulus_Pa);
    r.opt("poisson_ratio", g.poisson_ratio);
    r.opt("addendum_coeff", g.addendum_coeff);
    r.opt("dedendum_coeff", g.dedendum_coeff);
    r.opt("bore_radius_pinion_m", g.bore_radius_pinion_m);
    r.opt("bore_radius_gear_m", g.bore_radius_gear_m);
    r.opt("hertz_linearization_force_N", g.nominal_force_N);
    r.opt("coupling_fraction", g.coupling_fraction);
    r.finish();
  }
  top.opt("profile_samples", p.profile_samples);
  top.sub("comment");
  top.finish();
  try {
    p.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& ex) {
    throw ConfigError(std::string("system parameters: ") + ex.what());
  }
  return p;
}

cemg::SystemParams load_system_params(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& ex) {
    throw ConfigError(path.string() + ": " + ex.what());
  } catch (const Error& ex) {
    throw ConfigError(ex.what());
  }
  return system_params_from_json(j);
}

json to_json(const vmd::VmdConfig& c) {
  const char* init = c.init == vmd::Init::uniform ? "uniform" : c.init == vmd::Init::random ? "random" : "zeros";
  return {{"K", c.K},
          {"alpha", c.alpha},
          {"tau", c.tau},
          {"eps", c.eps},
          {"max_iters", c.max_iters},
          {"dc_mode", c.dc_mode},
          {"init", init},
          {"seed", c.seed}};
}

vmd::VmdConfig vmd_config_from_json(const json& j) {
  vmd::VmdConfig c;
  Reader r(j, "vmd");
  r.opt("K", c.K);
  r.opt("alpha", c.alpha);
  r.opt("tau", c.tau);
  r.opt("eps", c.eps);
  r.opt("max_iters", c.max_iters);
  r.opt("dc_mode", c.dc_mode);
  std::string init = "uniform";
  r.opt("init", init);
  if (init == "uniform") {
    c.init = vmd::Init::uniform;
  } else if (init == "random") {
    c.init = vmd::Init::random;
  } else if (init == "zeros") {
    c.init = vmd::Init::zeros;
  } else {
    throw ConfigError("vmd.init: expected uniform, random or zeros");
  }
  r.opt("seed", c.seed);
  r.finish();
  try {
    c.validate();
  } catch (const Error& ex) {
    throw ConfigError(std::string("vmd: ") + ex.what());
  }
  return c;
}

std::string params_hash(const cemg::SystemParams& p) { return hex64(fnv1a(to_json(p).dump())); }

}  // namespace gearcrack::io
