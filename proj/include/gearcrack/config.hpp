#pragma once

// Experiment configuration: JSON file or built-in preset.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gearcrack/cemg.hpp"
#include "gearcrack/chaos.hpp"
#include "gearcrack/io.hpp"
#include "gearcrack/vmd.hpp"

namespace gearcrack::config {

namespace fs = std::filesystem;

struct SpeedLoad {
  std::string label;
  double shaft_freq_Hz = 25.0;
  double load_torque_Nm = 0.0;
};

// Shaft frequency used to fold the record in TSA.
//   measured - mean pinion speed over the analysis window
//   nominal  - the case's shaft_freq_Hz
enum class PeriodSource { measured, nominal };

struct ExperimentConfig {
  std::string name = "custom";
  fs::path system_params_file;  // empty: built-in defaults
  cemg::SystemParams system = cemg::SystemParams::defaults();

  std::vector<SpeedLoad> speed_loads;
  std::vector<double> crack_depth_fractions;  // 0 is the healthy gear
  std::vector<double> snr_levels_dB;

  double sample_rate_Hz = 10000.0;
  double duration_s = 1.5;
  double settle_s = 0.5;  // discarded start-up transient
  std::string analysis_channel = "ddy_p";
  std::vector<std::string> persist_channels{"ddy_p", "omega_p", "omega_r", "T_e"};

  vmd::VmdConfig vmd;
  PeriodSource tsa_period_source = PeriodSource::measured;
  chaos::ChaosConfig chaos;

  fs::path output_dir = "out";
  std::uint64_t master_seed = 1;
  int workers = 0;  // 0: hardware concurrency

  std::size_t analysis_samples() const;
  // Number of whole samples dropped at the start.
  std::size_t settle_samples() const;
  // Throws ConfigError.
  void validate() const;
};

// Built-in presets: "desk" (10 kHz, 1 s analysed) and "paper" (100 kHz, 4 s analysed).
ExperimentConfig preset(const std::string& name);

// Relative paths inside the file resolve against the file's directory.
ExperimentConfig load(const fs::path& path);
ExperimentConfig from_json(const io::json& j, const fs::path& base_dir = {});
io::json to_json(const ExperimentConfig& c);

// Hash of the parts of the config that change results (not output_dir or workers).
std::string results_hash(const ExperimentConfig& c);

// Per-case seed = FNV-1a(labels joined by '|', seeded by the master seed).
std::uint64_t case_seed(std::uint64_t master_seed, const std::vector<std::string>& labels);

// Crack label of the i-th level in an ascending list: H for 0, then C1, C2, ...
int crack_index(const ExperimentConfig& c, std::size_t level);

}  // namespace gearcrack::config
