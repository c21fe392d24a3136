#include "gearcrack/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "gearcrack/error.hpp"
#include "gearcrack/signal.hpp"
#include "gearcrack/tsa.hpp"
#include "gearcrack/tvms.hpp"
#include "gearcrack/vmd.hpp"

namespace gearcrack::pipeline {

namespace {

using io::json;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string snr_token(double snr_db) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%gdB", snr_db < 0 ? "m" : "p", std::abs(snr_db));
  return buf;
}

std::string mode_name(std::size_t k) { return "VMF" + std::to_string(k + 1); }

const char* kStageFiles[] = {"sim", "signals", "modes", "tsa"};

json range_json(const chaos::FitRange& r) { return json::array({r.lo, r.hi}); }

chaos::FitRange range_from(const json& j) {
  return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
}

std::string opt_double(const std::optional<double>& v) { return v ? io::format_double(*v) : ""; }

void verify_checksums(const fs::path& out, const CaseEntry& e) {
  for (const auto& [rel, sum] : e.checksums) {
    const fs::path p = out / rel;
    if (!fs::exists(p)) throw Error("case " + e.id + ": missing artifact " + rel);
    if (io::file_checksum(p) != sum) throw Error("case " + e.id + ": checksum mismatch in " + rel);
  }
}

void save_manifest(const fs::path& out, const RunManifest& m) {
  io::write_text(manifest_path(out), to_json(m).dump(2) + "\n");
}

}  // namespace

std::vector<CaseSpec> enumerate_cases(const ExperimentConfig& cfg) {
  std::vector<CaseSpec> out;
  for (const auto& sl : cfg.speed_loads) {
    for (std::size_t level = 0; level < cfg.crack_depth_fractions.size(); ++level) {
      for (double snr : cfg.snr_levels_dB) {
        CaseSpec c;
        c.speed_load = sl.label;
        c.shaft_freq_Hz = sl.shaft_freq_Hz;
        c.load_torque_Nm = sl.load_torque_Nm;
        c.crack_index = config::crack_index(cfg, level);
        c.crack_depth = cfg.crack_depth_fractions[level];
        c.snr_db = snr;
        const std::string cond = chaos::condition_name(c.crack_index);
        c.id = sl.label + "_" + cond + "_" + snr_token(snr);
        c.seed = config::case_seed(cfg.master_seed, {sl.label, cond, snr_token(snr)});
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

cemg::SystemParams case_system(const ExperimentConfig& cfg, const CaseSpec& spec) {
  cemg::SystemParams p = cfg.system;
  p.motor.supply_frequency_Hz = p.motor.pole_pairs * spec.shaft_freq_Hz;
  p.mech.T_L = spec.load_torque_Nm;
  return p;
}

const char* to_string(Status s) {
  switch (s) {
    case Status::pending: return "pending";
    case Status::done: return "done";
    case Status::failed: return "failed";
  }
  return "?";
}

const CaseEntry* RunManifest::find(const std::string& id) const {
  for (const auto& c : cases) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

std::size_t RunManifest::count(Status s) const {
  return static_cast<std::size_t>(
      std::count_if(cases.begin(), cases.end(), [s](const CaseEntry& c) { return c.status == s; }));
}

fs::path manifest_path(const fs::path& out_dir) { return out_dir / "manifest.json"; }

json to_json(const RunManifest& m) {
  json j;
  j["config_hash"] = m.config_hash;
  j["config"] = m.config;
  json cases = json::array();
  for (const auto& c : m.cases) {
    json e;
    e["id"] = c.id;
    e["status"] = to_string(c.status);
    e["reason"] = c.reason;
    e["artifacts"] = c.artifacts;
    e["checksums"] = c.checksums;
    e["timings_s"] = c.timings_s;
    cases.push_back(std::move(e));
  }
  j["cases"] = cases;
  return j;
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  try {
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config = j.at("config");
    for (const auto& e : j.at("cases")) {
      CaseEntry c;
      c.id = e.at("id").get<std::string>();
      const std::string s = e.at("status").get<std::string>();
      c.status = s == "done" ? Status::done : s == "failed" ? Status::failed : Status::pending;
      c.reason = e.value("reason", "");
      c.artifacts = e.value("artifacts", std::map<std::string, std::string>{});
      c.checksums = e.value("checksums", std::map<std::string, std::string>{});
      c.timings_s = e.value("timings_s", std::map<std::string, double>{});
      m.cases.push_back(std::move(c));
    }
  } catch (const json::exception& ex) {
    throw Error(std::string("malformed manifest: ") + ex.what());
  }
  return m;
}

RunManifest load_manifest(const fs::path& out_dir) {
  const fs::path p = manifest_path(out_dir);
  try {
    return manifest_from_json(json::parse(io::read_text(p)));
  } catch (const json::exception& ex) {
    throw Error(p.string() + ": " + ex.what());
  }
}

CaseArtifacts compute_case(const ExperimentConfig& cfg, const CaseSpec& spec) {
  const cemg::SystemParams sys = case_system(cfg, spec);
  cemg::SimResult r = cemg::simulate(sys, tvms::CrackSpec{spec.crack_depth}, cfg.duration_s,
                                     cfg.sample_rate_Hz);
  r.metadata.params_hash = io::params_hash(sys);
  r.metadata.crack_level = spec.crack_depth;
  r.metadata.seed = spec.seed;
  io::Table sim = io::to_table(r, cfg.persist_channels);
  sim.metadata["case"] = spec.id;
  return analyse_case(cfg, spec, std::move(sim));
}

CaseArtifacts analyse_case(const ExperimentConfig& cfg, const CaseSpec& spec, io::Table sim) {
  const double fs = sim.sample_rate_Hz;
  const auto channel = sim.column(cfg.analysis_channel);
  const std::size_t start = cfg.settle_samples();
  const std::size_t n = cfg.analysis_samples();
  if (start + n > channel.size()) throw Error("case " + spec.id + ": record shorter than the analysis window");
  const std::vector<double> clean(channel.begin() + start, channel.begin() + start + n);

  CaseArtifacts a;
  const signal::NoisySignal noisy = signal::add_awgn(clean, spec.snr_db, spec.seed);
  a.signals.sample_rate_Hz = fs;
  a.signals.names = {"clean", "noisy"};
  a.signals.columns = {clean, noisy.data};
  a.signals.metadata = {{"case", spec.id},
                        {"channel", cfg.analysis_channel},
                        {"start_sample", start},
                        {"snr_db", spec.snr_db},
                        {"achieved_snr_db", noisy.achieved_snr_db},
                        {"seed", spec.seed}};

  const vmd::VmdResult dec = vmd::vmd(noisy.data, fs, cfg.vmd);
  a.modes.sample_rate_Hz = fs;
  for (std::size_t k = 0; k < dec.modes.size(); ++k) {
    a.modes.names.push_back(mode_name(k));
    a.modes.columns.push_back(dec.modes[k]);
  }
  a.modes.names.push_back("residual");
  a.modes.columns.push_back(dec.residual);
  a.modes.metadata = {{"case", spec.id},
                      {"center_freqs_Hz", dec.center_freqs_Hz},
                      {"iterations", dec.iterations},
                      {"final_update_norm", dec.final_update_norm},
                      {"converged", dec.converged}};

  double shaft_Hz = spec.shaft_freq_Hz;
  if (cfg.tsa_period_source == config::PeriodSource::measured) {
    const auto w = sim.column("omega_p");
    double mean = 0.0;
    for (std::size_t i = start; i < start + n; ++i) mean += w[i];
    shaft_Hz = mean / static_cast<double>(n) / (2.0 * std::numbers::pi);
  }
  const std::vector<tsa::TsaResult> bank = tsa::tsa_bank(dec, fs, shaft_Hz);
  a.averaged.sample_rate_Hz = fs;
  json residual_rms = json::array();
  bool drift_warning = false;
  for (std::size_t k = 0; k < bank.size(); ++k) {
    a.averaged.names.push_back(mode_name(k));
    a.averaged.columns.push_back(bank[k].averaged);
    residual_rms.push_back(bank[k].residual_rms);
    drift_warning = drift_warning || bank[k].drift_warning;
  }
  a.averaged.metadata = {{"case", spec.id},
                         {"shaft_freq_Hz", shaft_Hz},
                         {"period_samples", bank.front().period_samples},
                         {"n_averages", bank.front().n_averages},
                         {"drift_samples", bank.front().drift_samples},
                         {"drift_warning", drift_warning},
                         {"residual_rms", residual_rms}};

  chaos::ConditionSeries series;
  series.crack_index = spec.crack_index;
  series.speed_load = spec.speed_load;
  series.snr_db = spec.snr_db;
  series.modes = bank;
  a.features = chaos::feature_table(std::span(&series, 1), fs, cfg.chaos);
  a.sim = std::move(sim);
  return a;
}

json to_json(const chaos::FeatureRecord& r) {
  json j;
  j["label"] = r.label;
  j["condition"] = r.condition;
  j["speed_load"] = r.speed_load;
  j["snr_db"] = r.snr_db;
  j["mode"] = r.mode;
  if (r.le) {
    const auto& le = *r.le;
    j["le"] = {{"lambda_per_sample", le.lambda_per_sample},
               {"lambda_per_second", le.lambda_per_second},
               {"fit_range", range_json(le.fit_range)},
               {"r2", le.r2},
               {"reliable", le.reliable},
               {"divergence_curve", le.divergence_curve}};
  } else {
    j["le"] = nullptr;
  }
  j["le_error"] = r.le_error;
  if (r.cd) {
    const auto& cd = *r.cd;
    j["cd"] = {{"cd", cd.cd},
               {"fit_range", range_json(cd.fit_range)},
               {"r_lo", cd.r_lo},
               {"r_hi", cd.r_hi},
               {"slope_r2", cd.slope_r2},
               {"reliable", cd.reliable},
               {"admissible_pairs", cd.admissible_pairs},
               {"radii", cd.radii},
               {"corr_sums", cd.corr_sums},
               {"pair_counts", cd.pair_counts}};
  } else {
    j["cd"] = nullptr;
  }
  j["cd_error"] = r.cd_error;
  return j;
}

chaos::FeatureRecord feature_from_json(const json& j) {
  chaos::FeatureRecord r;
  r.label = j.at("label").get<std::string>();
  r.condition = j.at("condition").get<std::string>();
  r.speed_load = j.at("speed_load").get<std::string>();
  r.snr_db = j.at("snr_db").get<double>();
  r.mode = j.at("mode").get<int>();
  if (!j.at("le").is_null()) {
    const json& l = j.at("le");
    chaos::LeEstimate le;
    le.lambda_per_sample = l.at("lambda_per_sample").get<double>();
    le.lambda_per_second = l.at("lambda_per_second").get<double>();
    le.fit_range = range_from(l.at("fit_range"));
    le.r2 = l.at("r2").get<double>();
    le.reliable = l.at("reliable").get<bool>();
    le.divergence_curve = l.at("divergence_curve").get<std::vector<double>>();
    r.le = std::move(le);
  }
  r.le_error = j.value("le_error", "");
  if (!j.at("cd").is_null()) {
    const json& c = j.at("cd");
    chaos::CdEstimate cd;
    cd.cd = c.at("cd").get<double>();
    cd.fit_range = range_from(c.at("fit_range"));
    cd.r_lo = c.at("r_lo").get<double>();
    cd.r_hi = c.at("r_hi").get<double>();
    cd.slope_r2 = c.at("slope_r2").get<double>();
    cd.reliable = c.at("reliable").get<bool>();
    cd.admissible_pairs = c.at("admissible_pairs").get<std::size_t>();
    cd.radii = c.at("radii").get<std::vector<double>>();
    cd.corr_sums = c.at("corr_sums").get<std::vector<double>>();
    cd.pair_counts = c.at("pair_counts").get<std::vector<std::size_t>>();
    r.cd = std::move(cd);
  }
  r.cd_error = j.value("cd_error", "");
  return r;
}

void write_feature_csv(std::ostream& os, const std::vector<chaos::FeatureRecord>& records) {
  os << "condition,speed_load,snr_db,mode,LE_per_s,LE_r2,CD,CD_r2,reliable\n";
  for (const auto& r : records) {
    os << r.condition << ',' << r.speed_load << ',' << io::format_double(r.snr_db) << ',' << r.mode << ','
       << (r.le ? io::format_double(r.le->lambda_per_second) : "") << ','
       << (r.le ? io::format_double(r.le->r2) : "") << ',' << (r.cd ? io::format_double(r.cd->cd) : "")
       << ',' << (r.cd ? io::format_double(r.cd->slope_r2) : "") << ',' << (r.reliable() ? "true" : "false")
       << '\n';
  }
}

std::vector<chaos::FeatureRecord> collect_features(const fs::path& out, const RunManifest& m) {
  std::vector<chaos::FeatureRecord> all;
  for (const auto& c : m.cases) {
    if (c.status != Status::done) continue;
    const auto it = c.artifacts.find("features");
    if (it == c.artifacts.end()) throw Error("case " + c.id + ": no features artifact");
    const fs::path p = out / it->second;
    const auto sum = c.checksums.find(it->second);
    if (!fs::exists(p)) throw Error("case " + c.id + ": missing " + it->second);
    if (sum == c.checksums.end() || io::file_checksum(p) != sum->second) {
      throw Error("case " + c.id + ": checksum mismatch in " + it->second);
    }
    for (const auto& r : json::parse(io::read_text(p))) all.push_back(feature_from_json(r));
  }
  return all;
}

RunManifest run(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  auto log = [&](const std::string& line) {
    if (options.log) *options.log << line << '\n' << std::flush;
  };

  const std::vector<CaseSpec> specs = enumerate_cases(cfg);
  RunManifest m;
  m.config_hash = config::results_hash(cfg);
  m.config = config::to_json(cfg);

  std::optional<RunManifest> previous;
  if (fs::exists(manifest_path(out))) {
    try {
      previous = load_manifest(out);
      if (previous->config_hash != m.config_hash) {
        log("config changed since the last run; recomputing every case");
        previous.reset();
      }
    } catch (const Error& ex) {
      log(std::string("ignoring unreadable manifest: ") + ex.what());
    }
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    CaseEntry e;
    e.id = specs[i].id;
    const CaseEntry* old = previous ? previous->find(e.id) : nullptr;
    if (old && old->status == Status::done && !options.force) {
      e = *old;
      try {
        verify_checksums(out, e);
        log("skip " + e.id + " (already done)");
      } catch (const Error& ex) {
        e.status = Status::failed;
        e.reason = ex.what();
        log("fail " + e.id + ": " + e.reason);
      }
    } else {
      todo.push_back(i);
    }
    m.cases.push_back(std::move(e));
  }

  std::mutex mu;
  save_manifest(out, m);

  int workers = options.workers >= 0 ? options.workers : cfg.workers;
  if (workers == 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, static_cast<int>(std::max<std::size_t>(todo.size(), 1)));

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < todo.size(); t = next++) {
      const CaseSpec& spec = specs[todo[t]];
      CaseEntry e;
      e.id = spec.id;
      const auto t0 = clock_type::now();
      try {
        CaseArtifacts a = compute_case(cfg, spec);
        const fs::path rel_dir = fs::path("cases") / spec.id;
        fs::create_directories(out / rel_dir);
        const io::Table* tables[] = {&a.sim, &a.signals, &a.modes, &a.averaged};
        for (std::size_t k = 0; k < 4; ++k) {
          const fs::path base = rel_dir / kStageFiles[k];
          io::write_table(*tables[k], out / base);
          e.artifacts[kStageFiles[k]] = base.generic_string();
          for (const fs::path& f : {io::bin_path(base), io::sidecar_path(base)}) {
            e.checksums[f.generic_string()] = io::file_checksum(out / f);
          }
        }
        json records = json::array();
        for (const auto& r : a.features) records.push_back(to_json(r));
        const fs::path feat = rel_dir / "features.json";
        io::write_text(out / feat, records.dump(1) + "\n");
        e.artifacts["features"] = feat.generic_string();
        e.checksums[feat.generic_string()] = io::file_checksum(out / feat);
        e.status = Status::done;
      } catch (const std::exception& ex) {
        e.status = Status::failed;
        e.reason = ex.what();
      }
      e.timings_s["total"] = seconds_since(t0);

      std::lock_guard lock(mu);
      m.cases[todo[t]] = e;
      save_manifest(out, m);
      char buf[64];
      std::snprintf(buf, sizeof buf, "[%zu/%zu] ", ++finished, todo.size());
      log(buf + e.id + (e.status == Status::done ? " done" : " failed: " + e.reason));
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  const std::vector<chaos::FeatureRecord> records = collect_features(out, m);
  std::ostringstream csv;
  write_feature_csv(csv, records);
  io::write_text(out / "features.csv", csv.str());
  json all = json::array();
  for (const auto& r : records) all.push_back(to_json(r));
  io::write_text(out / "features.json", all.dump(1) + "\n");

  const TrendReport report = trend_report(cfg, records);
  io::write_text(out / "report.txt", report.text());
  io::write_text(out / "report.json", report.to_json().dump(2) + "\n");
  save_manifest(out, m);
  return m;
}

TrendReport trend_report(const ExperimentConfig& cfg, const std::vector<chaos::FeatureRecord>& records) {
  TrendReport rep;
  auto has_snr = [&](double s) {
    return std::find(cfg.snr_levels_dB.begin(), cfg.snr_levels_dB.end(), s) != cfg.snr_levels_dB.end();
  };
  auto find = [&](const std::string& sl, const std::string& cond, double snr, int mode) -> const chaos::FeatureRecord* {
    for (const auto& r : records) {
      if (r.speed_load == sl && r.condition == cond && r.snr_db == snr && r.mode == mode) return &r;
    }
    return nullptr;
  };

  auto& sp = rep.sign_pattern;
  sp.snr_db = -10.0;
  if (has_snr(-10.0) && cfg.vmd.K == 5) {
    sp.evaluated = true;
    std::size_t holds = 0;
    for (const auto& sl : cfg.speed_loads) {
      for (std::size_t level = 0; level < cfg.crack_depth_fractions.size(); ++level) {
        const std::string cond = chaos::condition_name(config::crack_index(cfg, level));
        SignPatternCase c;
        c.case_id = sl.label + "_" + cond + "_" + snr_token(-10.0);
        bool ok = true;
        for (int k = 1; k <= 5; ++k) {
          const auto* r = find(sl.label, cond, -10.0, k);
          if (!r || !r->le) {
            ok = false;
            c.le_per_s.push_back(std::nan(""));
            continue;
          }
          const double le = r->le->lambda_per_second;
          c.le_per_s.push_back(le);
          ok = ok && (k < 5 ? le > 0.0 : le < 0.0);
        }
        c.holds = ok;
        holds += ok;
        sp.cases.push_back(std::move(c));
      }
    }
    sp.fraction = sp.cases.empty() ? 0.0 : static_cast<double>(holds) / static_cast<double>(sp.cases.size());
    sp.reproduced = sp.fraction >= 0.75;
  }

  const std::pair<double, int> families[] = {{-10.0, 5}, {10.0, 4}};
  for (const auto& [snr, mode] : families) {
    CdFamilyReport f;
    f.snr_db = snr;
    f.mode = mode;
    f.speed_load = cfg.speed_loads.front().label;
    if (has_snr(snr) && mode <= cfg.vmd.K) {
      f.evaluated = true;
      f.non_increasing = true;
      std::optional<double> prev;
      for (std::size_t level = 0; level < cfg.crack_depth_fractions.size(); ++level) {
        const std::string cond = chaos::condition_name(config::crack_index(cfg, level));
        f.conditions.push_back(cond);
        const auto* r = find(f.speed_load, cond, snr, mode);
        std::optional<double> cd;
        if (r && r->cd) cd = r->cd->cd;
        f.cd.push_back(cd);
        if (!cd || (prev && *cd > *prev)) f.non_increasing = false;
        prev = cd;
      }
    }
    rep.cd_families.push_back(std::move(f));
  }
  return rep;
}

std::string TrendReport::text() const {
  std::ostringstream os;
  const auto& sp = sign_pattern;
  os << "LE sign pattern (VMF1-4 > 0, VMF5 < 0) at " << sp.snr_db << " dB\n";
  if (!sp.evaluated) {
    os << "  not evaluated: needs K = 5 and a " << sp.snr_db << " dB level\n";
  } else {
    for (const auto& c : sp.cases) {
      os << "  " << c.case_id << ":";
      for (double v : c.le_per_s) os << ' ' << io::format_double(v);
      os << (c.holds ? "  holds\n" : "  does not hold\n");
    }
    os << "  fraction " << sp.fraction << (sp.reproduced ? ": REPRODUCED\n" : ": NOT REPRODUCED at this scale\n");
  }
  for (const auto& f : cd_families) {
    os << "CD non-increasing with crack depth, " << f.speed_load << ", " << f.snr_db << " dB, VMF" << f.mode
       << '\n';
    if (!f.evaluated) {
      os << "  not evaluated: level or mode absent from the configuration\n";
      continue;
    }
    for (std::size_t i = 0; i < f.conditions.size(); ++i) {
      os << "  " << f.conditions[i] << ' ' << (f.cd[i] ? io::format_double(*f.cd[i]) : "n/a") << '\n';
    }
    os << (f.non_increasing ? "  REPRODUCED\n" : "  NOT REPRODUCED at this scale\n");
  }
  return os.str();
}

io::json TrendReport::to_json() const {
  json j;
  json cases = json::array();
  for (const auto& c : sign_pattern.cases) {
    json le = json::array();
    for (double v : c.le_per_s) le.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    cases.push_back({{"case", c.case_id}, {"le_per_s", le}, {"holds", c.holds}});
  }
  j["le_sign_pattern"] = {{"snr_db", sign_pattern.snr_db},
                          {"evaluated", sign_pattern.evaluated},
                          {"fraction", sign_pattern.fraction},
                          {"reproduced", sign_pattern.reproduced},
                          {"cases", cases}};
  json fams = json::array();
  for (const auto& f : cd_families) {
    json cd = json::array();
    for (const auto& v : f.cd) cd.push_back(v ? json(*v) : json(nullptr));
    fams.push_back({{"snr_db", f.snr_db},
                    {"speed_load", f.speed_load},
                    {"mode", f.mode},
                    {"evaluated", f.evaluated},
                    {"conditions", f.conditions},
                    {"cd", cd},
                    {"non_increasing", f.non_increasing}});
  }
  j["cd_families"] = fams;
  return j;
}

const std::vector<Plot>& all_plots() {
  static const std::vector<Plot> v{Plot::tvms,       Plot::timeseries, Plot::vmfs,     Plot::tsa,
                                   Plot::envelope,   Plot::divergence, Plot::corr_sum, Plot::features};
  return v;
}

const char* to_string(Plot p) {
  switch (p) {
    case Plot::tvms: return "tvms";
    case Plot::timeseries: return "timeseries";
    case Plot::vmfs: return "vmfs";
    case Plot::tsa: return "tsa";
    case Plot::envelope: return "envelope";
    case Plot::divergence: return "divergence";
    case Plot::corr_sum: return "corr_sum";
    case Plot::features: return "features";
  }
  return "?";
}

Plot plot_from_string(const std::string& name) {
  for (Plot p : all_plots()) {
    if (name == to_string(p)) return p;
  }
  throw ConfigError("unknown plot '" + name + "'");
}

fs::path emit_plot(const fs::path& out, Plot which) {
  const RunManifest m = load_manifest(out);
  const ExperimentConfig cfg = config::from_json(m.config);
  std::ostringstream os;

  auto done_cases = [&]() {
    for (const auto& c : m.cases) {
      if (c.status != Status::done) throw Error("case " + c.id + " is not complete (" + to_string(c.status) + ")");
    }
    return m.cases;
  };
  auto table = [&](const CaseEntry& c, const char* stage) {
    const auto it = c.artifacts.find(stage);
    if (it == c.artifacts.end()) throw Error("case " + c.id + ": missing " + stage + " artifact");
    try {
      return io::read_table(out / it->second);
    } catch (const Error& ex) {
      throw Error("case " + c.id + ": " + ex.what());
    }
  };
  auto wide = [&](const char* stage, const char* index_name, bool time_axis) {
    const auto cases = done_cases();
    bool header = false;
    for (const auto& c : cases) {
      const io::Table t = table(c, stage);
      if (!header) {
        os << "case," << index_name;
        for (const auto& n : t.names) os << ',' << n;
        os << '\n';
        header = true;
      }
      for (std::size_t i = 0; i < t.rows(); ++i) {
        os << c.id << ',' << (time_axis ? io::format_double(static_cast<double>(i) / t.sample_rate_Hz) : std::to_string(i));
        for (const auto& col : t.columns) os << ',' << io::format_double(col[i]);
        os << '\n';
      }
    }
  };

  switch (which) {
    case Plot::tvms: {
      os << "crack_depth,mesh_angle_rad,k_total,c_total,region\n";
      for (double depth : cfg.crack_depth_fractions) {
        const auto prof = tvms::build_profile(cfg.system.gear, tvms::CrackSpec{depth},
                                              cfg.system.profile_samples, cfg.system.mesh_damping());
        for (std::size_t i = 0; i < prof.size(); ++i) {
          os << io::format_double(depth) << ',' << io::format_double(prof.mesh_angle_rad[i]) << ','
             << io::format_double(prof.k_total_N_per_m[i]) << ',' << io::format_double(prof.c_total_Ns_per_m[i])
             << ',' << tvms::to_string(prof.region[i]) << '\n';
        }
      }
      break;
    }
    case Plot::timeseries: wide("signals", "time_s", true); break;
    case Plot::vmfs: wide("modes", "time_s", true); break;
    case Plot::tsa: wide("tsa", "sample", false); break;
    case Plot::envelope: {
      os << "case,mode,freq_hz,magnitude\n";
      for (const auto& c : done_cases()) {
        const io::Table t = table(c, "tsa");
        for (std::size_t k = 0; k < t.columns.size(); ++k) {
          const auto env = signal::envelope_spectrum(t.columns[k], t.sample_rate_Hz);
          for (std::size_t i = 0; i < env.freq_Hz.size(); ++i) {
            os << c.id << ',' << t.names[k] << ',' << io::format_double(env.freq_Hz[i]) << ','
               << io::format_double(env.magnitude[i]) << '\n';
          }
        }
      }
      break;
    }
    case Plot::divergence:
    case Plot::corr_sum:
    case Plot::features: {
      done_cases();
      const auto records = collect_features(out, m);
      if (which == Plot::divergence) {
        os << "label,speed_load,snr_db,mode,step,mean_log_distance\n";
        for (const auto& r : records) {
          if (!r.le) continue;
          for (std::size_t i = 0; i < r.le->divergence_curve.size(); ++i) {
            os << r.label << ',' << r.speed_load << ',' << io::format_double(r.snr_db) << ',' << r.mode << ','
               << i << ',' << io::format_double(r.le->divergence_curve[i]) << '\n';
          }
        }
      } else if (which == Plot::corr_sum) {
        os << "label,speed_load,snr_db,mode,log_r,log_C\n";
        for (const auto& r : records) {
          if (!r.cd) continue;
          for (std::size_t i = 0; i < r.cd->radii.size(); ++i) {
            if (r.cd->corr_sums[i] <= 0.0) continue;
            os << r.label << ',' << r.speed_load << ',' << io::format_double(r.snr_db) << ',' << r.mode << ','
               << io::format_double(std::log(r.cd->radii[i])) << ',' << io::format_double(std::log(r.cd->corr_sums[i]))
               << '\n';
          }
        }
      } else {
        os << "label,speed_load,snr_db,mode,LE_per_s,CD\n";
        for (const auto& r : records) {
          os << r.label << ',' << r.speed_load << ',' << io::format_double(r.snr_db) << ',' << r.mode << ','
             << opt_double(r.le ? std::optional(r.le->lambda_per_second) : std::nullopt) << ','
             << opt_double(r.cd ? std::optional(r.cd->cd) : std::nullopt) << '\n';
        }
      }
      break;
    }
  }
  const fs::path p = out / "plots" / (std::string(to_string(which)) + ".csv");
  io::write_text(p, os.str());
  return p;
}

}  // namespace gearcrack::pipeline
