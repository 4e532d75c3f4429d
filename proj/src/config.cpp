#include "qdt/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace qdt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid numeric value for key " + key + ": " + value);
  }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid integer value for key " + key + ": " + value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("invalid boolean value for key " + key + ": " + value);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  try {
    source.validate();
    iface.validate();
    detector.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (n_pulses < 0) throw ConfigError("run.n_pulses must be >= 0");
  if (!(tomo.coincidence_window_s > 0.0))
    throw ConfigError("tomo.coincidence_window_s must be > 0");
  if (!(tomo.target_total_counts > 0.0))
    throw ConfigError("tomo.target_total_counts must be > 0");
  if (tomo.n_bootstrap < 0) throw ConfigError("tomo.n_bootstrap must be >= 0");
}

void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "source.rep_rate_hz") cfg.source.rep_rate_hz = parse_double(key, value);
  else if (key == "source.pulse_fwhm_s") cfg.source.pulse_fwhm_s = parse_double(key, value);
  else if (key == "source.mean_pairs") cfg.source.mean_pairs = parse_double(key, value);
  else if (key == "source.tau_xx_s") cfg.source.tau_xx_s = parse_double(key, value);
  else if (key == "source.tau_x_s") cfg.source.tau_x_s = parse_double(key, value);
  else if (key == "source.fss_period_s") cfg.source.fss_period_s = parse_double(key, value);
  else if (key == "source.phase_phi0_rad") cfg.source.phase_phi0_rad = parse_double(key, value);
  else if (key == "source.depolarization") cfg.source.depolarization = parse_double(key, value);
  else if (key == "source.capture_suppression") cfg.source.capture_suppression = parse_double(key, value);
  else if (key == "source.mode") {
    if (value == "dot") cfg.source.mode = SourceMode::Dot;
    else if (value == "poissonian_reference") cfg.source.mode = SourceMode::PoissonianReference;
    else throw ConfigError("invalid value for key source.mode: " + value);
  }
  else if (key == "source.poisson_pair_prob") cfg.source.poisson_pair_prob = parse_double(key, value);
  else if (key == "interface.delta_t_s") cfg.iface.delta_t_s = parse_double(key, value);
  else if (key == "interface.theta_fwd_rad") cfg.iface.theta_fwd_rad = parse_double(key, value);
  else if (key == "interface.theta_back_rad") cfg.iface.theta_back_rad = parse_double(key, value);
  else if (key == "interface.polarizer_angle_deg") cfg.iface.polarizer_angle_deg = parse_double(key, value);
  else if (key == "interface.transmission_short") cfg.iface.transmission_short = parse_double(key, value);
  else if (key == "interface.transmission_long") cfg.iface.transmission_long = parse_double(key, value);
  else if (key == "detector.efficiency_xx") cfg.detector.efficiency[0] = parse_double(key, value);
  else if (key == "detector.efficiency_x") cfg.detector.efficiency[1] = parse_double(key, value);
  else if (key == "detector.jitter_fwhm_s") cfg.detector.jitter_fwhm_s = parse_double(key, value);
  else if (key == "detector.dark_rate_hz") cfg.detector.dark_rate_hz = parse_double(key, value);
  else if (key == "detector.dead_time_s") cfg.detector.dead_time_s = parse_double(key, value);
  else if (key == "tomo.integration_time_pol_s") cfg.tomo.integration_time_pol_s = parse_double(key, value);
  else if (key == "tomo.integration_time_timebin_s") cfg.tomo.integration_time_timebin_s = parse_double(key, value);
  else if (key == "tomo.coincidence_window_s") cfg.tomo.coincidence_window_s = parse_double(key, value);
  else if (key == "tomo.target_total_counts") cfg.tomo.target_total_counts = parse_double(key, value);
  else if (key == "tomo.n_bootstrap") cfg.tomo.n_bootstrap = static_cast<int>(parse_int(key, value));
  else if (key == "tomo.noiseless") cfg.tomo.noiseless = parse_bool(key, value);
  else if (key == "run.n_pulses") cfg.n_pulses = parse_int(key, value);
  else if (key == "run.seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
  else throw ConfigError("unknown config key: " + key);
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("malformed config line " + std::to_string(lineno) +
                        " (expected key=value): " + t);
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    apply_config_entry(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "source.rep_rate_hz=" << fmt(cfg.source.rep_rate_hz) << '\n'
      << "source.pulse_fwhm_s=" << fmt(cfg.source.pulse_fwhm_s) << '\n'
      << "source.mean_pairs=" << fmt(cfg.source.mean_pairs) << '\n'
      << "source.tau_xx_s=" << fmt(cfg.source.tau_xx_s) << '\n'
      << "source.tau_x_s=" << fmt(cfg.source.tau_x_s) << '\n'
      << "source.fss_period_s=" << fmt(cfg.source.fss_period_s) << '\n'
      << "source.phase_phi0_rad=" << fmt(cfg.source.phase_phi0_rad) << '\n'
      << "source.depolarization=" << fmt(cfg.source.depolarization) << '\n'
      << "source.capture_suppression=" << fmt(cfg.source.capture_suppression) << '\n'
      << "source.mode="
      << (cfg.source.mode == SourceMode::Dot ? "dot" : "poissonian_reference")
      << '\n'
      << "source.poisson_pair_prob=" << fmt(cfg.source.poisson_pair_prob) << '\n'
      << "interface.delta_t_s=" << fmt(cfg.iface.delta_t_s) << '\n'
      << "interface.theta_fwd_rad=" << fmt(cfg.iface.theta_fwd_rad) << '\n'
      << "interface.theta_back_rad=" << fmt(cfg.iface.theta_back_rad) << '\n'
      << "interface.polarizer_angle_deg=" << fmt(cfg.iface.polarizer_angle_deg) << '\n'
      << "interface.transmission_short=" << fmt(cfg.iface.transmission_short) << '\n'
      << "interface.transmission_long=" << fmt(cfg.iface.transmission_long) << '\n'
      << "detector.efficiency_xx=" << fmt(cfg.detector.efficiency[0]) << '\n'
      << "detector.efficiency_x=" << fmt(cfg.detector.efficiency[1]) << '\n'
      << "detector.jitter_fwhm_s=" << fmt(cfg.detector.jitter_fwhm_s) << '\n'
      << "detector.dark_rate_hz=" << fmt(cfg.detector.dark_rate_hz) << '\n'
      << "detector.dead_time_s=" << fmt(cfg.detector.dead_time_s) << '\n'
      << "tomo.integration_time_pol_s=" << fmt(cfg.tomo.integration_time_pol_s) << '\n'
      << "tomo.integration_time_timebin_s=" << fmt(cfg.tomo.integration_time_timebin_s) << '\n'
      << "tomo.coincidence_window_s=" << fmt(cfg.tomo.coincidence_window_s) << '\n'
      << "tomo.target_total_counts=" << fmt(cfg.tomo.target_total_counts) << '\n'
      << "tomo.n_bootstrap=" << cfg.tomo.n_bootstrap << '\n'
      << "tomo.noiseless=" << (cfg.tomo.noiseless ? "true" : "false") << '\n'
      << "run.n_pulses=" << cfg.n_pulses << '\n'
      << "run.seed=" << cfg.seed << '\n';
  return out.str();
}

}  // namespace qdt
