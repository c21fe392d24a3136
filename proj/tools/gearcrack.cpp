// gearcrack command-line front end.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gearcrack/chaos.hpp"
#include "gearcrack/config.hpp"
#include "gearcrack/error.hpp"
#include "gearcrack/io.hpp"
#include "gearcrack/pipeline.hpp"
#include "gearcrack/vmd.hpp"

namespace {

namespace gc = gearcrack;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kConfig = 2;

struct Source {
  std::string config_file;
  std::string preset;
  std::string out_dir;
  long long seed = -1;
  int workers = -1;

  void add(CLI::App* app) {
    app->add_option("-c,--config", config_file, "experiment config (JSON)")->check(CLI::ExistingFile);
    app->add_option("-p,--preset", preset, "built-in preset: desk or paper");
    app->add_option("-o,--out", out_dir, "output directory");
    app->add_option("-s,--seed", seed, "master seed override");
    app->add_option("-j,--workers", workers, "worker threads (0 = all cores)");
  }

  gc::config::ExperimentConfig load() const {
    if (!config_file.empty() && !preset.empty()) throw gc::ConfigError("give --config or --preset, not both");
    gc::config::ExperimentConfig c =
        config_file.empty() ? gc::config::preset(preset.empty() ? "desk" : preset) : gc::config::load(config_file);
    if (!out_dir.empty()) c.output_dir = out_dir;
    if (seed >= 0) c.master_seed = static_cast<std::uint64_t>(seed);
    if (workers >= 0) c.workers = workers;
    c.validate();
    return c;
  }
};

void write_csv_pair(const std::string& path, const auto& object, const gc::io::json& meta, auto&&... extra) {
  std::ostringstream os;
  gc::io::write_csv(os, object, extra...);
  gc::io::write_text(path, os.str());
  gc::io::write_text(path + ".json", meta.dump(2) + "\n");
}

int simulate(const Source& src, double crack, const std::string& speed_load, const std::string& out,
             const std::string& csv, bool all_channels) {
  if (out.empty() && csv.empty()) throw gc::ConfigError("give --table and/or --csv");
  const auto cfg = src.load();
  for (const auto& spec : gc::pipeline::enumerate_cases(cfg)) {
    if ((!speed_load.empty() && spec.speed_load != speed_load) || spec.snr_db != cfg.snr_levels_dB.front()) continue;
    auto s = spec;
    s.crack_depth = crack;
    const auto sys = gc::pipeline::case_system(cfg, s);
    auto r = gc::cemg::simulate(sys, gc::tvms::CrackSpec{crack}, cfg.duration_s, cfg.sample_rate_Hz);
    r.metadata.params_hash = gc::io::params_hash(sys);
    r.metadata.crack_level = crack;
    auto t = all_channels ? gc::io::to_table(r) : gc::io::to_table(r, cfg.persist_channels);
    t.metadata["speed_load"] = s.speed_load;
    if (!out.empty()) gc::io::write_table(t, out);
    if (!csv.empty()) {
      const auto kept = gc::io::to_sim_result(t);
      write_csv_pair(csv, kept, gc::io::sidecar(kept));
    }
    const auto ss = gc::cemg::steady_state_summary(r, sys.motor);
    std::printf("%s: %zu samples at %g Hz, rotor %.4g rad/s, slip %.4g, torque %.4g N m\n",
                out.empty() ? csv.c_str() : gc::io::bin_path(out).c_str(), r.size(), r.sample_rate_Hz, ss.mean_rotor_speed, ss.slip,
                ss.mean_torque);
    return kOk;
  }
  throw gc::ConfigError("no speed_load named '" + speed_load + "'");
}

int decompose(const std::string& input, const std::string& channel, std::size_t start, int K,
              const std::string& out, const std::string& csv) {
  if (out.empty() && csv.empty()) throw gc::ConfigError("give --table and/or --csv");
  const auto t = gc::io::read_table(input);
  const auto x = t.column(channel);
  if (start >= x.size()) throw gc::DomainError("start sample beyond the record");
  gc::vmd::VmdConfig cfg;
  if (K > 0) cfg.K = K;
  cfg.validate();
  const auto dec = gc::vmd::vmd(x.subspan(start), t.sample_rate_Hz, cfg);
  gc::io::Table m;
  m.sample_rate_Hz = t.sample_rate_Hz;
  for (std::size_t k = 0; k < dec.modes.size(); ++k) {
    m.names.push_back("VMF" + std::to_string(k + 1));
    m.columns.push_back(dec.modes[k]);
  }
  m.names.push_back("residual");
  m.columns.push_back(dec.residual);
  m.metadata = {{"center_freqs_Hz", dec.center_freqs_Hz},
                {"iterations", dec.iterations},
                {"converged", dec.converged}};
  if (!out.empty()) gc::io::write_table(m, out);
  if (!csv.empty()) write_csv_pair(csv, dec, gc::io::sidecar(dec), t.sample_rate_Hz);
  for (std::size_t k = 0; k < dec.center_freqs_Hz.size(); ++k) {
    std::printf("VMF%zu %.6g Hz\n", k + 1, dec.center_freqs_Hz[k]);
  }
  if (!dec.converged) std::fprintf(stderr, "warning: VMD hit max_iters before converging\n");
  return kOk;
}

int features(const std::string& input, const gc::chaos::ChaosConfig& cc, const std::string& out) {
  const auto t = gc::io::read_table(input);
  gc::chaos::LeConfig le;
  le.m = cc.m;
  le.d = cc.d;
  le.theiler_window = cc.le_theiler_window;
  le.max_steps = cc.le_max_steps;
  gc::chaos::CdConfig cd;
  cd.m = cc.m;
  cd.d = cc.d;
  cd.theiler_window = cc.cd_theiler_window;
  cd.radii.count = cc.cd_radii;

  gc::io::json rows = gc::io::json::array();
  std::printf("column,LE_per_s,LE_r2,CD,CD_r2\n");
  for (std::size_t i = 0; i < t.names.size(); ++i) {
    gc::chaos::FeatureRecord r;
    r.label = t.names[i];
    r.mode = static_cast<int>(i) + 1;
    try {
      r.le = gc::chaos::lyapunov(t.columns[i], t.sample_rate_Hz, le);
    } catch (const gc::Error& ex) {
      r.le_error = ex.what();
    }
    try {
      r.cd = gc::chaos::correlation_dimension(t.columns[i], cd);
    } catch (const gc::Error& ex) {
      r.cd_error = ex.what();
    }
    std::printf("%s,%s,%s,%s,%s\n", r.label.c_str(),
                r.le ? gc::io::format_double(r.le->lambda_per_second).c_str() : "",
                r.le ? gc::io::format_double(r.le->r2).c_str() : "",
                r.cd ? gc::io::format_double(r.cd->cd).c_str() : "",
                r.cd ? gc::io::format_double(r.cd->slope_r2).c_str() : "");
    rows.push_back(gc::pipeline::to_json(r));
  }
  if (!out.empty()) gc::io::write_text(out, rows.dump(1) + "\n");
  return kOk;
}

int run(const Source& src, bool force) {
  const auto cfg = src.load();
  gc::pipeline::RunOptions opt;
  opt.force = force;
  opt.log = &std::cerr;
  const auto m = gc::pipeline::run(cfg, opt);
  const auto report = gc::io::read_text(cfg.output_dir / "report.txt");
  std::cout << report;
  std::printf("%zu/%zu cases done, %zu failed; output in %s\n", m.count(gc::pipeline::Status::done),
              m.cases.size(), m.count(gc::pipeline::Status::failed), cfg.output_dir.c_str());
  return m.all_done() ? kOk : kPartial;
}

int plots(const std::string& out_dir, const std::vector<std::string>& which) {
  std::vector<gc::pipeline::Plot> list;
  if (which.empty()) {
    list = gc::pipeline::all_plots();
  } else {
    for (const auto& w : which) list.push_back(gc::pipeline::plot_from_string(w));
  }
  int status = kOk;
  for (auto p : list) {
    try {
      std::printf("%s\n", gc::pipeline::emit_plot(out_dir, p).c_str());
    } catch (const gc::ConfigError&) {
      throw;
    } catch (const gc::Error& ex) {
      std::fprintf(stderr, "%s: %s\n", gc::pipeline::to_string(p), ex.what());
      status = kPartial;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gearbox crack simulation and chaos-feature pipeline"};
  app.require_subcommand(1);

  Source src;
  double crack = 0.0;
  std::string speed_load, out, csv, input, channel = "ddy_p";
  bool all_channels = false, force = false;
  std::size_t start = 0;
  int K = 0;
  gc::chaos::ChaosConfig cc;
  std::vector<std::string> which;

  auto* sim = app.add_subcommand("simulate", "simulate one record");
  src.add(sim);
  sim->add_option("--crack", crack, "crack depth fraction")->check(CLI::Range(0.0, 0.99));
  sim->add_option("--speed-load", speed_load, "speed-load label from the config (default: first)");
  sim->add_option("--table", out, "output table base path (.bin + .json)");
  sim->add_option("--csv", csv, "output CSV path (a .json sidecar is written next to it)");
  sim->add_flag("--all-channels", all_channels, "persist every state channel");

  auto* dec = app.add_subcommand("decompose", "VMD of one table column");
  dec->add_option("-i,--input", input, "input table base path")->required();
  dec->add_option("--channel", channel, "column to decompose");
  dec->add_option("--start-sample", start, "first sample used");
  dec->add_option("-K,--modes", K, "number of modes");
  dec->add_option("--table", out, "output table base path (.bin + .json)");
  dec->add_option("--csv", csv, "output CSV path: t,mode_1..mode_K,residual");

  auto* feat = app.add_subcommand("features", "LE and CD of every column of a table");
  feat->add_option("-i,--input", input, "input table base path")->required();
  feat->add_option("-m", cc.m, "embedding dimension");
  feat->add_option("-d", cc.d, "delay in samples");
  feat->add_option("--le-theiler", cc.le_theiler_window, "LE Theiler window (samples)");
  feat->add_option("--cd-theiler", cc.cd_theiler_window, "CD Theiler window (samples)");
  feat->add_option("--json", out, "write full diagnostics here");

  auto* runc = app.add_subcommand("run", "run the experiment matrix");
  src.add(runc);
  runc->add_flag("--force", force, "recompute finished cases");

  std::string plot_dir;
  auto* pl = app.add_subcommand("plots", "write plot-data CSVs from a finished run");
  pl->add_option("-o,--out", plot_dir, "run output directory")->required();
  pl->add_option("--which", which, "tvms timeseries vmfs tsa envelope divergence corr_sum features (default: all)");

  auto* val = app.add_subcommand("validate-config", "check a config and print it normalized");
  src.add(val);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*sim) {
      if (speed_load.empty()) speed_load = src.load().speed_loads.front().label;
      return simulate(src, crack, speed_load, out, csv, all_channels);
    }
    if (*dec) return decompose(input, channel, start, K, out, csv);
    if (*feat) return features(input, cc, out);
    if (*runc) return run(src, force);
    if (*pl) return plots(plot_dir, which);
    if (*val) {
      std::cout << gc::config::to_json(src.load()).dump(2) << '\n';
      return kOk;
    }
  } catch (const gc::ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << '\n';
    return kConfig;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kPartial;
  }
  return kOk;
}
