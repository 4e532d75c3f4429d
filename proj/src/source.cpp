#include "qdt/source.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qdt/rng.hpp"

namespace qdt {

namespace {

constexpr std::int64_t kChunkPulses = 1 << 16;

}  // namespace

void SourceConfig::validate() const {
  if (!(rep_rate_hz > 0.0)) throw std::invalid_argument("source: rep_rate_hz must be > 0");
  if (!(pulse_fwhm_s > 0.0)) throw std::invalid_argument("source: pulse_fwhm_s must be > 0");
  if (!(tau_xx_s > 0.0)) throw std::invalid_argument("source: tau_xx_s must be > 0");
  if (!(tau_x_s > 0.0)) throw std::invalid_argument("source: tau_x_s must be > 0");
  if (!(fss_period_s > 0.0)) throw std::invalid_argument("source: fss_period_s must be > 0");
  if (!(mean_pairs >= 0.0)) throw std::invalid_argument("source: mean_pairs must be >= 0");
  if (!(rep_period_s() > pulse_fwhm_s))
    throw std::invalid_argument("source: rep period must exceed pulse_fwhm_s");
  if (!(depolarization >= 0.0 && depolarization <= 1.0))
    throw std::invalid_argument("source: depolarization must be in [0,1]");
  if (!(capture_suppression >= 0.0 && capture_suppression <= 1.0))
    throw std::invalid_argument("source: capture_suppression must be in [0,1]");
  if (mode == SourceMode::PoissonianReference &&
      !(poisson_pair_prob >= 0.0 && poisson_pair_prob < 1.0))
    throw std::invalid_argument("source: poisson_pair_prob must be in [0,1)");
}

TwoQubitDensity cascade_state(const SourceConfig& cfg, double x_delay_s) {
  if (x_delay_s < 0.0)
    throw std::invalid_argument("cascade_state: negative x_delay");
  const double omega = 2.0 * M_PI / cfg.fss_period_s;
  const double phase = cfg.phase_phi0_rad + omega * x_delay_s;
  const TwoQubitState psi = bell_state(phase);
  const double eps = cfg.depolarization;
  const Mat4c m = (1.0 - eps) * (psi.amplitudes() * psi.amplitudes().adjoint()) +
                  eps * 0.25 * Mat4c::Identity();
  return TwoQubitDensity::trusted(m, Basis::Polarization);
}

namespace {

// One re-excitation attempt after a decay completing inside the pulse
// window: success probability 1 - exp(-mu * remaining window fraction),
// scaled by `suppression` when the refill must capture onto an occupied dot.
bool reexcite(const SourceConfig& cfg, double t, double window_end,
              double suppression, std::mt19937_64& rng) {
  if (t >= window_end) return false;
  const double frac = (window_end - t) / cfg.window_s();
  const double p = suppression * (1.0 - std::exp(-cfg.mean_pairs * frac));
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

void sample_dot_pulse(const SourceConfig& cfg, std::int64_t pulse_index,
                      double t0, std::mt19937_64& rng, EmissionRecord& out) {
  std::poisson_distribution<int> pair_count(cfg.mean_pairs);
  const int n = pair_count(rng);
  if (n == 0) return;

  std::exponential_distribution<double> decay_xx(1.0 / cfg.tau_xx_s);
  std::exponential_distribution<double> decay_x(1.0 / cfg.tau_x_s);

  const double window_end = t0 + cfg.window_s();
  double t = t0;  // pump absorption at the window start

  // Dot level: 2 = XX, 1 = X, 0 = ground. States above XX are spectrally
  // rejected downstream, so n > 2 still starts a single XX->X cascade.
  int level = (n >= 2) ? 2 : 1;
  bool have_xx = false;
  double pending_xx = 0.0;

  while (level > 0) {
    if (level == 2) {
      t += decay_xx(rng);
      out.xx_times_s.push_back(t);
      pending_xx = t;
      have_xx = true;
      level = 1;
      if (reexcite(cfg, t, window_end, cfg.capture_suppression, rng)) {
        // The X left behind is promoted back to XX; its cascade partner is
        // lost, which is what spoils perfect pair statistics.
        out.pairs.push_back(PairEmission{pulse_index, pending_xx, 0.0,
                                         TwoQubitDensity::maximally_mixed(),
                                         false});
        have_xx = false;
        level = 2;
      }
    } else {
      t += decay_x(rng);
      out.x_times_s.push_back(t);
      if (have_xx) {
        const double delay = t - pending_xx;
        out.pairs.push_back(PairEmission{pulse_index, pending_xx, t,
                                         cascade_state(cfg, delay), true});
        have_xx = false;
      }
      level = 0;
      if (reexcite(cfg, t, window_end, 1.0, rng)) level = 1;
    }
  }
}

void sample_poissonian_pulse(const SourceConfig& cfg, std::int64_t pulse_index,
                             double t0, std::mt19937_64& rng,
                             EmissionRecord& out) {
  // Exact Poisson pulse statistics with P(>=1 pair) = p.
  const double lambda = -std::log1p(-cfg.poisson_pair_prob);
  std::poisson_distribution<int> pair_count(lambda);
  const int k = pair_count(rng);
  if (k == 0) return;

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::exponential_distribution<double> decay_xx(1.0 / cfg.tau_xx_s);
  std::exponential_distribution<double> decay_x(1.0 / cfg.tau_x_s);

  for (int i = 0; i < k; ++i) {
    const double te = t0 + uni(rng) * cfg.window_s();
    const double t_xx = te + decay_xx(rng);
    const double t_x = t_xx + decay_x(rng);
    out.xx_times_s.push_back(t_xx);
    out.x_times_s.push_back(t_x);
    out.pairs.push_back(PairEmission{pulse_index, t_xx, t_x,
                                     cascade_state(cfg, t_x - t_xx), true});
  }
}

}  // namespace

void sample_pulse(const SourceConfig& cfg, std::int64_t pulse_index,
                  std::mt19937_64& rng, EmissionRecord& out) {
  out.clear();
  out.pulse_index = pulse_index;
  const double t0 = static_cast<double>(pulse_index) * cfg.rep_period_s();
  if (cfg.mode == SourceMode::Dot)
    sample_dot_pulse(cfg, pulse_index, t0, rng, out);
  else
    sample_poissonian_pulse(cfg, pulse_index, t0, rng, out);
}

void run_source(const SourceConfig& cfg, std::int64_t n_pulses,
                std::uint64_t seed,
                const std::function<void(const EmissionRecord&)>& sink) {
  cfg.validate();
  if (n_pulses < 0) throw std::invalid_argument("run_source: n_pulses < 0");
  const double span_ps = static_cast<double>(n_pulses) * cfg.rep_period_s() * 1e12;
  if (span_ps >= std::ldexp(1.0, 62))
    throw std::invalid_argument("run_source: time span overflows 2^62 ps");

  EmissionRecord record;
  for (std::int64_t chunk = 0; chunk * kChunkPulses < n_pulses; ++chunk) {
    auto rng = make_substream(seed, "source", static_cast<std::uint64_t>(chunk));
    const std::int64_t begin = chunk * kChunkPulses;
    const std::int64_t end = std::min(n_pulses, begin + kChunkPulses);
    for (std::int64_t k = begin; k < end; ++k) {
      sample_pulse(cfg, k, rng, record);
      sink(record);
    }
  }
}

std::vector<EmissionRecord> collect_source(const SourceConfig& cfg,
                                           std::int64_t n_pulses,
                                           std::uint64_t seed) {
  std::vector<EmissionRecord> records;
  run_source(cfg, n_pulses, seed,
             [&](const EmissionRecord& r) { records.push_back(r); });
  return records;
}

}  // namespace qdt
