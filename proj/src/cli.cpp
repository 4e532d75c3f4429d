#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qdt/pipeline.hpp"

namespace qdt {

namespace {

// Write-to-temp plus atomic rename, so failures leave no partial file.
void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + tmp);
    out << content;
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename output into place: " + path);
  }
}

int parse_channel(const std::string& name) {
  std::string low;
  for (char c : name) low.push_back(static_cast<char>(std::tolower(
      static_cast<unsigned char>(c))));
  if (low == "xx" || low == "0") return channel::kXX;
  if (low == "x" || low == "1") return channel::kX;
  if (low == "trigger" || low == "laser" || low == "2") return channel::kTrigger;
  throw ConfigError("unknown channel name: " + name);
}

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::int64_t pulses = -1;
  std::int64_t seed = -1;
};

RunConfig build_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = load_config_file(args.config_path);
  for (const std::string& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("malformed --set (expected key=value): " + kv);
    apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.pulses >= 0) cfg.n_pulses = args.pulses;
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file");
  cmd->add_option("--set", args.overrides,
                  "override one configuration key (key=value), repeatable");
  cmd->add_option("--pulses", args.pulses, "number of excitation pulses");
  cmd->add_option("--seed", args.seed, "random seed");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

int cmd_simulate(const CommonArgs& args, const std::string& out_path,
                 const std::string& stage_name) {
  const RunConfig cfg = build_config(args);
  SimStage stage;
  if (stage_name == "source") stage = SimStage::Source;
  else if (stage_name == "timebin") stage = SimStage::TimeBin;
  else throw ConfigError("unknown stage: " + stage_name);

  const std::vector<TimeTag> tags = simulate_tags(cfg, stage);
  std::ostringstream buf;
  write_tags_csv(buf, tags);
  write_file_atomic(out_path, buf.str());

  std::int64_t per_channel[3] = {0, 0, 0};
  for (const TimeTag& t : tags)
    if (t.channel >= 0 && t.channel < 3) ++per_channel[t.channel];
  std::cout << "pulses=" << cfg.n_pulses << " tags_xx=" << per_channel[0]
            << " tags_x=" << per_channel[1] << " tags_trigger=" << per_channel[2]
            << " out=" << out_path << "\n";
  return 0;
}

int cmd_g2(const std::string& tags_path, const std::string& start_name,
           const std::string& stop_name, double bin_width_s, double range_s,
           int side_peaks, double rep_period_s, const std::string& out_path,
           const std::string& metrics_path) {
  const int start_ch = parse_channel(start_name);
  const int stop_ch = parse_channel(stop_name);

  std::ifstream in(tags_path);
  if (!in) throw IoError("cannot open tags file: " + tags_path);
  const std::vector<TimeTag> tags = read_tags_csv(in);

  bool start_seen = false, stop_seen = false;
  for (const TimeTag& t : tags) {
    start_seen = start_seen || t.channel == start_ch;
    stop_seen = stop_seen || t.channel == stop_ch;
  }
  if (!start_seen || !stop_seen)
    throw CorrelateError(std::string("empty channel: ") +
                         (!start_seen ? start_name : stop_name));

  const CoincidenceHistogram hist = build_histogram(
      tags, start_ch, stop_ch, static_cast<std::int64_t>(bin_width_s * 1e12),
      static_cast<std::int64_t>(range_s * 1e12), rep_period_s);
  const G2Result g2 = g2_zero(hist, side_peaks);

  if (!out_path.empty()) {
    std::ostringstream buf;
    write_histogram_csv(buf, hist);
    write_file_atomic(out_path, buf.str());
  }
  std::ostringstream metrics;
  write_g2_metrics(metrics, g2);
  if (!metrics_path.empty()) write_file_atomic(metrics_path, metrics.str());
  std::cout << metrics.str();
  return 0;
}

int cmd_tomo(const CommonArgs& args, const std::string& mode_name,
             const std::string& out_prefix) {
  const RunConfig cfg = build_config(args);
  TomographyMode mode;
  if (mode_name == "pol" || mode_name == "polarization")
    mode = TomographyMode::Polarization;
  else if (mode_name == "timebin")
    mode = TomographyMode::TimeBin;
  else
    throw ConfigError("unknown tomography mode: " + mode_name);

  const TomoPipelineResult result = run_tomography_pipeline(cfg, mode, true);

  std::ostringstream counts_buf;
  write_counts_csv(counts_buf, result.counts);
  write_file_atomic(out_prefix + "_counts.csv", counts_buf.str());
  write_file_atomic(out_prefix + "_rho.txt", to_text(result.rec.rho));

  std::ostringstream metrics;
  metrics << "concurrence=" << format_double(result.rec.concurrence) << '\n'
          << "fidelity_best=" << format_double(result.rec.fidelity_best) << '\n'
          << "best_phase_rad=" << format_double(result.rec.best_phase_rad) << '\n'
          << "sigma_c=" << format_double(result.rec.sigma_concurrence) << '\n'
          << "sigma_f=" << format_double(result.rec.sigma_fidelity) << '\n'
          << "converged=" << (result.rec.converged ? "true" : "false") << '\n';
  write_file_atomic(out_prefix + "_metrics.txt", metrics.str());
  std::cout << metrics.str();
  return 0;
}

int cmd_reproduce(const CommonArgs& args, const std::string& paper_values,
                  const std::string& out_path) {
  const RunConfig cfg = build_config(args);
  const std::vector<ReproduceRow> rows = run_reproduce(cfg, paper_values);
  std::ostringstream out;
  out << "name,simulated,paper_value,paper_error,tolerance,within_band,reference\n";
  for (const ReproduceRow& r : rows) {
    char sim[40];
    std::snprintf(sim, sizeof(sim), "%.3g", r.simulated);
    out << r.name << ',' << sim << ',' << format_double(r.paper_value) << ','
        << format_double(r.paper_error) << ',' << format_double(r.tolerance)
        << ',' << (r.within_band ? "true" : "false") << ',' << r.reference
        << '\n';
  }
  write_file_atomic(out_path, out.str());
  std::cout << out.str();
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"quantum-dot time-bin entangled photon pair simulator"};
  app.require_subcommand(1);

  CommonArgs sim_args;
  std::string sim_out = "tags.csv", sim_stage = "source";
  CLI::App* sim = app.add_subcommand("simulate", "generate a time-tag file");
  add_common(sim, sim_args);
  sim->add_option("--out", sim_out, "output tag CSV path");
  sim->add_option("--stage", sim_stage, "source | timebin");

  std::string g2_tags, g2_start = "XX", g2_stop = "X";
  double g2_bin = 128e-12, g2_range = 100e-9, g2_rep = 12.5e-9;
  int g2_side = 6;
  std::string g2_out, g2_metrics;
  CLI::App* g2 = app.add_subcommand("g2", "coincidence histogram and g2(0)");
  g2->add_option("--tags", g2_tags, "input tag CSV")->required();
  g2->add_option("--start", g2_start, "start channel (XX|X|trigger)");
  g2->add_option("--stop", g2_stop, "stop channel");
  g2->add_option("--bin-width", g2_bin, "bin width, seconds");
  g2->add_option("--range", g2_range, "delay range, seconds");
  g2->add_option("--side-peaks", g2_side, "side peaks per side");
  g2->add_option("--rep-period", g2_rep, "pulse period, seconds");
  g2->add_option("--out", g2_out, "histogram CSV path");
  g2->add_option("--metrics", g2_metrics, "metrics output path");

  CommonArgs tomo_args;
  std::string tomo_mode = "pol", tomo_prefix = "tomo";
  CLI::App* tomo = app.add_subcommand("tomo", "16-setting state tomography");
  add_common(tomo, tomo_args);
  tomo->add_option("--mode", tomo_mode, "pol | timebin");
  tomo->add_option("--out-prefix", tomo_prefix, "output file prefix");

  CommonArgs rep_args;
  std::string rep_values = "data/paper_values.csv", rep_out = "report.csv";
  CLI::App* rep = app.add_subcommand("reproduce", "full reference-value table");
  add_common(rep, rep_args);
  rep->add_option("--paper-values", rep_values, "reference value table");
  rep->add_option("--out", rep_out, "report CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_args, sim_out, sim_stage);
    if (g2->parsed())
      return cmd_g2(g2_tags, g2_start, g2_stop, g2_bin, g2_range, g2_side,
                    g2_rep, g2_out, g2_metrics);
    if (tomo->parsed()) return cmd_tomo(tomo_args, tomo_mode, tomo_prefix);
    if (rep->parsed()) return cmd_reproduce(rep_args, rep_values, rep_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CorrelateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace qdt
