#include "gearcrack/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gearcrack/error.hpp"

namespace gearcrack::config {

namespace {

constexpr double kLbfInToNm = 0.112984829;

template <typename T>
T take(const io::json& j, const char* key, T fallback, std::set<std::string>& seen) {
  seen.insert(key);
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const io::json::exception& ex) {
    throw ConfigError(std::string(key) + ": " + ex.what());
  }
}

void reject_unknown(const io::json& j, const std::set<std::string>& seen, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (!seen.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

ExperimentConfig base_matrix() {
  ExperimentConfig c;
  c.speed_loads = {{"25Hz-25lb", 25.0, 25.0 * kLbfInToNm}, {"25Hz-50lb", 25.0, 50.0 * kLbfInToNm}};
  c.crack_depth_fractions = {0.0, 0.2, 0.4, 0.6};
  c.snr_levels_dB = {10.0, -10.0};
  c.vmd.K = 5;
  c.master_seed = 20240611;
  return c;
}

}  // namespace

std::size_t ExperimentConfig::analysis_samples() const {
  return static_cast<std::size_t>(std::llround((duration_s - settle_s) * sample_rate_Hz));
}

std::size_t ExperimentConfig::settle_samples() const {
  return static_cast<std::size_t>(std::llround(settle_s * sample_rate_Hz));
}

void ExperimentConfig::validate() const {
  if (speed_loads.empty()) throw ConfigError("at least one speed_load case is required");
  if (crack_depth_fractions.empty()) throw ConfigError("at least one crack level is required");
  if (snr_levels_dB.empty()) throw ConfigError("at least one SNR level is required");

  std::set<std::string> labels;
  for (const auto& s : speed_loads) {
    if (s.label.empty()) throw ConfigError("speed_load label is empty");
    if (s.label.find_first_of("/\\|,") != std::string::npos) {
      throw ConfigError("speed_load label '" + s.label + "' contains a reserved character");
    }
    if (!labels.insert(s.label).second) throw ConfigError("duplicate speed_load label " + s.label);
    if (!(s.shaft_freq_Hz > 0.0)) throw ConfigError(s.label + ": shaft_freq_Hz must be positive");
    if (!(s.load_torque_Nm >= 0.0)) throw ConfigError(s.label + ": load_torque_Nm must be >= 0");
  }
  if (crack_depth_fractions.front() != 0.0) {
    throw ConfigError("crack_depth_fractions must start with 0 (healthy)");
  }
  for (std::size_t i = 0; i < crack_depth_fractions.size(); ++i) {
    const double d = crack_depth_fractions[i];
    if (!(d >= 0.0 && d < 1.0)) throw ConfigError("crack depth fraction outside [0, 1)");
    if (i > 0 && !(d > crack_depth_fractions[i - 1])) {
      throw ConfigError("crack_depth_fractions must be strictly ascending");
    }
  }
  std::set<double> snrs(snr_levels_dB.begin(), snr_levels_dB.end());
  if (snrs.size() != snr_levels_dB.size()) throw ConfigError("duplicate SNR level");
  for (double s : snr_levels_dB) {
    if (!std::isfinite(s)) throw ConfigError("SNR level must be finite");
  }

  if (!(sample_rate_Hz > 0.0)) throw ConfigError("sample_rate_Hz must be positive");
  if (!(settle_s >= 0.0) || !(duration_s > settle_s)) {
    throw ConfigError("duration_s must exceed settle_s >= 0");
  }
  for (const auto& s : speed_loads) {
    const double V = sample_rate_Hz / s.shaft_freq_Hz;
    if (static_cast<double>(analysis_samples()) < 2.0 * V) {
      throw ConfigError(s.label + ": analysis window shorter than two shaft revolutions");
    }
  }
  auto known_channel = [](const std::string& name) {
    for (int i = 0; i < cemg::kStateSize; ++i) {
      if (cemg::state_name(i) == name) return true;
    }
    return std::find(cemg::kDerivedChannels.begin(), cemg::kDerivedChannels.end(), name) !=
           cemg::kDerivedChannels.end();
  };
  for (const auto& ch : persist_channels) {
    if (!known_channel(ch)) throw ConfigError("unknown channel " + ch);
  }
  if (std::find(persist_channels.begin(), persist_channels.end(), analysis_channel) ==
      persist_channels.end()) {
    throw ConfigError("persist_channels must include the analysis channel " + analysis_channel);
  }
  if (std::find(persist_channels.begin(), persist_channels.end(), "omega_p") == persist_channels.end()) {
    throw ConfigError("persist_channels must include omega_p (TSA period source)");
  }
  if (workers < 0) throw ConfigError("workers must be >= 0");
  if (chaos.m < 1 || chaos.d < 1) throw ConfigError("chaos embedding needs m >= 1 and d >= 1");

  try {
    vmd.validate();
    system.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& ex) {
    throw ConfigError(ex.what());
  }
  const double f_mesh_max = [&] {
    double f = 0.0;
    for (const auto& s : speed_loads) f = std::max(f, s.shaft_freq_Hz * system.gear.teeth_pinion);
    return f;
  }();
  if (sample_rate_Hz < 20.0 * f_mesh_max) {
    throw ConfigError("sample_rate_Hz must be at least 20x the mesh frequency");
  }
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c = base_matrix();
  c.name = name;
  if (name == "desk") {
    c.sample_rate_Hz = 10000.0;
    c.duration_s = 1.5;
    c.settle_s = 0.5;
    c.output_dir = "out/desk";
  } else if (name == "paper") {
    c.sample_rate_Hz = 100000.0;
    c.duration_s = 4.5;
    c.settle_s = 0.5;
    c.output_dir = "out/paper";
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
  }
  return c;
}

ExperimentConfig from_json(const io::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: expected an object");
  std::set<std::string> seen;
  const std::string preset_name = take<std::string>(j, "preset", "", seen);
  ExperimentConfig c = preset_name.empty() ? base_matrix() : preset(preset_name);

  c.name = take(j, "name", preset_name.empty() ? c.name : preset_name, seen);
  const std::string params = take<std::string>(j, "system_params_file", "", seen);
  if (!params.empty()) {
    fs::path p(params);
    if (p.is_relative()) p = base_dir / p;
    if (!fs::exists(p)) throw ConfigError("system_params_file not found: " + p.string());
    c.system_params_file = p;
    c.system = io::load_system_params(p);
  }
  seen.insert("system");
  if (j.contains("system")) {
    if (!params.empty()) throw ConfigError("give either system_params_file or an inline system, not both");
    c.system = io::system_params_from_json(j.at("system"));
  }

  seen.insert("speed_loads");
  if (j.contains("speed_loads")) {
    c.speed_loads.clear();
    if (!j.at("speed_loads").is_array()) throw ConfigError("speed_loads: expected an array");
    for (const auto& e : j.at("speed_loads")) {
      std::set<std::string> s;
      SpeedLoad sl;
      sl.label = take<std::string>(e, "label", "", s);
      sl.shaft_freq_Hz = take(e, "shaft_freq_Hz", 25.0, s);
      sl.load_torque_Nm = take(e, "load_torque_Nm", 0.0, s);
      reject_unknown(e, s, "speed_loads[]");
      c.speed_loads.push_back(sl);
    }
  }
  c.crack_depth_fractions = take(j, "crack_depth_fractions", c.crack_depth_fractions, seen);
  c.snr_levels_dB = take(j, "snr_levels_dB", c.snr_levels_dB, seen);
  c.sample_rate_Hz = take(j, "sample_rate_Hz", c.sample_rate_Hz, seen);
  c.duration_s = take(j, "duration_s", c.duration_s, seen);
  c.settle_s = take(j, "settle_s", c.settle_s, seen);
  c.analysis_channel = take(j, "analysis_channel", c.analysis_channel, seen);
  c.persist_channels = take(j, "persist_channels", c.persist_channels, seen);

  seen.insert("vmd");
  if (j.contains("vmd")) c.vmd = io::vmd_config_from_json(j.at("vmd"));

  seen.insert("tsa");
  if (j.contains("tsa")) {
    std::set<std::string> s;
    const auto src = take<std::string>(j.at("tsa"), "period_source", "measured", s);
    reject_unknown(j.at("tsa"), s, "tsa");
    if (src == "measured") {
      c.tsa_period_source = PeriodSource::measured;
    } else if (src == "nominal") {
      c.tsa_period_source = PeriodSource::nominal;
    } else {
      throw ConfigError("tsa.period_source: expected measured or nominal");
    }
  }

  seen.insert("chaos");
  if (j.contains("chaos")) {
    const auto& cj = j.at("chaos");
    std::set<std::string> s;
    auto& ch = c.chaos;
    ch.m = take(cj, "embedding_dimension", ch.m, s);
    ch.d = take(cj, "delay_samples", ch.d, s);
    ch.le_theiler_window = take(cj, "le_theiler_window_samples", ch.le_theiler_window, s);
    ch.cd_theiler_window = take(cj, "cd_theiler_window_samples", ch.cd_theiler_window, s);
    ch.le_max_steps = take(cj, "le_max_steps", ch.le_max_steps, s);
    ch.cd_radii = take(cj, "cd_radii", ch.cd_radii, s);
    reject_unknown(cj, s, "chaos");
  }

  c.output_dir = take<std::string>(j, "output_dir", c.output_dir.string(), seen);
  c.master_seed = take(j, "master_seed", c.master_seed, seen);
  c.workers = take(j, "workers", c.workers, seen);
  seen.insert("comment");
  reject_unknown(j, seen, "config");
  c.validate();
  return c;
}

ExperimentConfig load(const fs::path& path) {
  io::json j;
  try {
    j = io::json::parse(io::read_text(path));
  } catch (const io::json::exception& ex) {
    throw ConfigError(path.string() + ": " + ex.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& ex) {
    throw ConfigError(ex.what());
  }
  return from_json(j, path.parent_path());
}

io::json to_json(const ExperimentConfig& c) {
  io::json j;
  j["name"] = c.name;
  j["system"] = io::to_json(c.system);
  io::json sl = io::json::array();
  for (const auto& s : c.speed_loads) {
    sl.push_back({{"label", s.label}, {"shaft_freq_Hz", s.shaft_freq_Hz}, {"load_torque_Nm", s.load_torque_Nm}});
  }
  j["speed_loads"] = sl;
  j["crack_depth_fractions"] = c.crack_depth_fractions;
  j["snr_levels_dB"] = c.snr_levels_dB;
  j["sample_rate_Hz"] = c.sample_rate_Hz;
  j["duration_s"] = c.duration_s;
  j["settle_s"] = c.settle_s;
  j["analysis_channel"] = c.analysis_channel;
  j["persist_channels"] = c.persist_channels;
  j["vmd"] = io::to_json(c.vmd);
  j["tsa"] = {{"period_source", c.tsa_period_source == PeriodSource::measured ? "measured" : "nominal"}};
  j["chaos"] = {{"embedding_dimension", c.chaos.m},
                {"delay_samples", c.chaos.d},
                {"le_theiler_window_samples", c.chaos.le_theiler_window},
                {"cd_theiler_window_samples", c.chaos.cd_theiler_window},
                {"le_max_steps", c.chaos.le_max_steps},
                {"cd_radii", c.chaos.cd_radii}};
  j["output_dir"] = c.output_dir.string();
  j["master_seed"] = c.master_seed;
  j["workers"] = c.workers;
  return j;
}

std::string results_hash(const ExperimentConfig& c) {
  io::json j = to_json(c);
  j.erase("name");
  j.erase("output_dir");
  j.erase("workers");
  return io::hex64(io::fnv1a(j.dump()));
}

std::uint64_t case_seed(std::uint64_t master_seed, const std::vector<std::string>& labels) {
  std::string joined;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) joined += '|';
    joined += labels[i];
  }
  return io::fnv1a(joined, io::fnv1a(std::to_string(master_seed)));
}

int crack_index(const ExperimentConfig& c, std::size_t level) {
  if (level >= c.crack_depth_fractions.size()) throw OutOfRangeError("crack level index out of range");
  return static_cast<int>(level);
}

}  // namespace gearcrack::config
