#pragma once

// End-to-end experiment runner: simulate, add noise, decompose, average,
// extract features; persist every stage and one aggregate feature table.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gearcrack/chaos.hpp"
#include "gearcrack/config.hpp"
#include "gearcrack/io.hpp"

namespace gearcrack::pipeline {

namespace fs = std::filesystem;
using config::ExperimentConfig;

struct CaseSpec {
  std::string id;  // e.g. 25Hz-25lb_C2_m10dB
  std::string speed_load;
  double shaft_freq_Hz = 0.0;
  double load_torque_Nm = 0.0;
  int crack_index = 0;
  double crack_depth = 0.0;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

// Order: speed load, crack level, SNR (outermost first).
std::vector<CaseSpec> enumerate_cases(const ExperimentConfig& cfg);

// System parameters for one case: supply frequency = pole pairs x shaft
// frequency, gear load torque from the case.
cemg::SystemParams case_system(const ExperimentConfig& cfg, const CaseSpec& spec);

enum class Status { pending, done, failed };
const char* to_string(Status s);

struct CaseEntry {
  std::string id;
  Status status = Status::pending;
  std::string reason;
  std::map<std::string, std::string> artifacts;  // name -> path relative to the output dir
  std::map<std::string, std::string> checksums;  // path -> FNV-1a
  std::map<std::string, double> timings_s;
};

struct RunManifest {
  std::string config_hash;
  io::json config;
  std::vector<CaseEntry> cases;

  const CaseEntry* find(const std::string& id) const;
  std::size_t count(Status s) const;
  bool all_done() const { return count(Status::done) == cases.size(); }
};

io::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const io::json& j);
RunManifest load_manifest(const fs::path& out_dir);
fs::path manifest_path(const fs::path& out_dir);

// Everything computed for one case, as persisted.
struct CaseArtifacts {
  io::Table sim;       // persisted channels over the full record
  io::Table signals;   // clean, noisy over the analysis window
  io::Table modes;     // VMF1..VMFK, residual
  io::Table averaged;  // VMF1..VMFK after TSA
  std::vector<chaos::FeatureRecord> features;
};

// Runs one case in memory.
CaseArtifacts compute_case(const ExperimentConfig& cfg, const CaseSpec& spec);

// Runs noise + VMD + TSA + features on an already simulated record.
CaseArtifacts analyse_case(const ExperimentConfig& cfg, const CaseSpec& spec, io::Table sim);

struct RunOptions {
  int workers = -1;     // < 0: take from the config
  bool force = false;   // recompute finished cases
  std::ostream* log = nullptr;
};

// Idempotent: finished cases whose artifacts still match their checksums are
// skipped. A finished case whose artifacts no longer match is marked failed.
RunManifest run(const ExperimentConfig& cfg, const RunOptions& options = {});

io::json to_json(const chaos::FeatureRecord& r);
chaos::FeatureRecord feature_from_json(const io::json& j);

// condition,speed_load,snr_db,mode,LE_per_s,LE_r2,CD,CD_r2,reliable
void write_feature_csv(std::ostream& os, const std::vector<chaos::FeatureRecord>& records);

// Aggregate records of all finished cases, in case order.
std::vector<chaos::FeatureRecord> collect_features(const fs::path& out_dir, const RunManifest& m);

// LE sign pattern: modes 1..4 positive and mode 5 negative.
struct SignPatternCase {
  std::string case_id;
  std::vector<double> le_per_s;
  bool holds = false;
};

struct SignPatternReport {
  double snr_db = 0.0;
  std::vector<SignPatternCase> cases;
  double fraction = 0.0;
  bool evaluated = false;
  bool reproduced = false;  // fraction >= 0.75
};

// CD across H, C1, C2, ... for one (SNR, speed load, mode) family.
struct CdFamilyReport {
  double snr_db = 0.0;
  std::string speed_load;
  int mode = 0;
  std::vector<std::string> conditions;
  std::vector<std::optional<double>> cd;
  bool evaluated = false;
  bool non_increasing = false;
};

struct TrendReport {
  SignPatternReport sign_pattern;
  std::vector<CdFamilyReport> cd_families;

  std::string text() const;
  io::json to_json() const;
};

TrendReport trend_report(const ExperimentConfig& cfg, const std::vector<chaos::FeatureRecord>& records);

enum class Plot { tvms, timeseries, vmfs, tsa, envelope, divergence, corr_sum, features };
const std::vector<Plot>& all_plots();
const char* to_string(Plot p);
Plot plot_from_string(const std::string& name);

// Writes <out_dir>/plots/<name>.csv and returns its path.
fs::path emit_plot(const fs::path& out_dir, Plot which);

}  // namespace gearcrack::pipeline
