#include "qdt/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "qdt/rng.hpp"

namespace qdt {

namespace {

constexpr int kNumSettings = 16;

std::array<std::pair<AnalyzerLabel, AnalyzerLabel>, 16> standard_settings() {
  using L = AnalyzerLabel;
  const std::array<L, 4> first{L::H, L::V, L::D, L::L};
  std::array<std::pair<L, L>, 16> s;
  int k = 0;
  for (L a : first)
    for (L b : first) s[k++] = {a, b};
  return s;
}

Mat4c cholesky_to_rho(const std::vector<double>& t) {
  Mat4c tri = Mat4c::Zero();
  tri(0, 0) = t[0];
  tri(1, 1) = t[1];
  tri(2, 2) = t[2];
  tri(3, 3) = t[3];
  tri(1, 0) = Complex(t[4], t[5]);
  tri(2, 0) = Complex(t[6], t[7]);
  tri(2, 1) = Complex(t[8], t[9]);
  tri(3, 0) = Complex(t[10], t[11]);
  tri(3, 1) = Complex(t[12], t[13]);
  tri(3, 2) = Complex(t[14], t[15]);
  Mat4c rho = tri.adjoint() * tri;
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) return 0.25 * Mat4c::Identity();
  return rho / tr;
}

std::vector<double> rho_to_cholesky(const Mat4c& rho_physical) {
  // Lower-triangular factor of a strictly positive clamp of rho.
  Eigen::SelfAdjointEigenSolver<Mat4c> es(rho_physical);
  Eigen::Vector4d ev = es.eigenvalues();
  for (int i = 0; i < 4; ++i) ev(i) = std::max(ev(i), 1e-8);
  Mat4c m = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  m /= m.trace().real();
  Eigen::LLT<Mat4c> llt(m);
  Mat4c lower = llt.matrixL();
  Mat4c tri = lower.adjoint();  // parametrization uses T^dag T
  std::vector<double> t(16);
  t[0] = tri(0, 0).real();
  t[1] = tri(1, 1).real();
  t[2] = tri(2, 2).real();
  t[3] = tri(3, 3).real();
  // matrixL gives L with L L^dag = m; our tri = L^dag so tri^dag tri = m.
  t[4] = tri(1, 0).real();
  t[5] = tri(1, 0).imag();
  t[6] = tri(2, 0).real();
  t[7] = tri(2, 0).imag();
  t[8] = tri(2, 1).real();
  t[9] = tri(2, 1).imag();
  t[10] = tri(3, 0).real();
  t[11] = tri(3, 0).imag();
  t[12] = tri(3, 1).real();
  t[13] = tri(3, 1).imag();
  t[14] = tri(3, 2).real();
  t[15] = tri(3, 2).imag();
  return t;
}

double mle_cost(const std::vector<double>& t,
                const std::array<double, 16>& counts,
                const std::array<Mat4c, 16>& ops, double total) {
  const Mat4c rho = cholesky_to_rho(t);
  std::array<double, 16> tr;
  double tr_sum = 0.0;
  for (int s = 0; s < kNumSettings; ++s) {
    tr[s] = std::max(0.0, (ops[s] * rho).trace().real());
    tr_sum += tr[s];
  }
  if (!(tr_sum > 0.0)) return 1e300;
  const double rate = total / tr_sum;  // rate as a nuisance parameter
  const double floor = 1e-12 * total;
  double cost = 0.0;
  for (int s = 0; s < kNumSettings; ++s) {
    const double nbar = std::max(rate * tr[s], floor);
    const double d = nbar - counts[s];
    cost += d * d / (2.0 * nbar);
  }
  return cost;
}

std::array<double, 16> to_doubles(const SettingCounts& counts) {
  std::array<double, 16> out;
  for (int i = 0; i < kNumSettings; ++i)
    out[i] = static_cast<double>(counts[i].coincidences);
  return out;
}

}  // namespace

TomographyPlan TomographyPlan::polarization() {
  TomographyPlan plan;
  plan.settings = standard_settings();
  plan.integration_time_s = 300.0;
  plan.mode = TomographyMode::Polarization;
  return plan;
}

TomographyPlan TomographyPlan::timebin() {
  TomographyPlan plan;
  plan.settings = standard_settings();
  plan.integration_time_s = 1800.0;
  plan.mode = TomographyMode::TimeBin;
  return plan;
}

std::array<Mat4c, 16> measurement_operators(const TomographyPlan& plan,
                                            const InterfaceConfig& cfg) {
  std::array<Mat4c, 16> ops;
  for (int s = 0; s < kNumSettings; ++s) {
    const Analyzer a = Analyzer::make(plan.settings[s].first);
    const Analyzer b = Analyzer::make(plan.settings[s].second);
    if (plan.mode == TomographyMode::Polarization)
      ops[s] = projector(a, b).matrix();
    else
      ops[s] = effective_timebin_projector(a, b, cfg).matrix();
  }
  return ops;
}

std::array<double, 16> expected_counts(const Mat4c& rho,
                                       const std::array<Mat4c, 16>& ops,
                                       double total) {
  std::array<double, 16> mean;
  double sum = 0.0;
  for (int s = 0; s < kNumSettings; ++s) {
    mean[s] = std::max(0.0, (ops[s] * rho).trace().real());
    sum += mean[s];
  }
  if (!(sum > 0.0)) throw std::invalid_argument("expected_counts: zero rates");
  for (double& m : mean) m *= total / sum;
  return mean;
}

void PairAccumulator::add(const PairEmission& pair, double window_s) {
  if (!pair.complete) return;
  const double delay = pair.t_x_s - pair.t_xx_s;
  if (delay < 0.0 || delay > window_s) return;
  rho_sum += pair.joint_state.matrix();
  n_pairs += 1.0;
}

SettingCounts simulate_counts(const PairAccumulator& acc,
                              const TomographyPlan& plan,
                              const InterfaceConfig& cfg, double rate_scale,
                              std::uint64_t seed, bool noiseless) {
  Mat4c rho_sum = acc.rho_sum;
  double prefactor = rate_scale;

  if (plan.mode == TomographyMode::TimeBin) {
    // Convert the summed state through the interface (linear map, includes
    // the polarizer transmission) and apply the both-photons-cross factor.
    const double ang = cfg.polarizer_angle_deg * M_PI / 180.0;
    Mat2c k = Mat2c::Zero();
    k(0, 0) = std::cos(ang) * std::sqrt(cfg.transmission_short);
    k(1, 1) = std::sin(ang) * std::sqrt(cfg.transmission_long) *
              std::exp(Complex(0.0, cfg.theta_fwd_rad));
    Mat4c kk;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) kk.block<2, 2>(2 * i, 2 * j) = k(i, j) * k;
    rho_sum = kk * rho_sum * kk.adjoint();
    prefactor *= 0.25;
  }

  // Physical measurement operators; in time-bin mode the true theta_back
  // enters here even though the analysis assumes zero.
  const std::array<Mat4c, 16> ops = measurement_operators(plan, cfg);

  SettingCounts out;
  auto rng = make_substream(seed, "counts", 0);
  for (int s = 0; s < kNumSettings; ++s) {
    const double mean =
        prefactor * std::max(0.0, (ops[s] * rho_sum).trace().real());
    std::int64_t n = 0;
    if (noiseless) {
      n = std::llround(mean);
    } else if (mean > 0.0) {
      std::poisson_distribution<std::int64_t> poi(mean);
      n = poi(rng);
    }
    out[s] = TomographySettingCount{plan.settings[s].first,
                                    plan.settings[s].second, n};
  }
  return out;
}

SettingCounts simulate_counts(std::span<const PairEmission> pairs,
                              const TomographyPlan& plan,
                              const InterfaceConfig& cfg, double rate_scale,
                              std::uint64_t seed, bool noiseless) {
  PairAccumulator acc;
  for (const PairEmission& pair : pairs)
    acc.add(pair, plan.coincidence_window_s);
  return simulate_counts(acc, plan, cfg, rate_scale, seed, noiseless);
}

LinearInversion linear_reconstruct(const std::array<double, 16>& counts,
                                   const std::array<Mat4c, 16>& ops) {
  const double total_rate =
      counts[0] + counts[1] + counts[4] + counts[5];  // HH+HV+VH+VV
  if (!(total_rate > 0.0))
    throw std::invalid_argument("linear_reconstruct: zero normalization counts");

  // Dual basis of the measurement operators under the trace inner product.
  Eigen::Matrix<double, 16, 16> gram;
  for (int i = 0; i < kNumSettings; ++i)
    for (int j = 0; j < kNumSettings; ++j)
      gram(i, j) = (ops[i] * ops[j]).trace().real();
  Eigen::FullPivLU<Eigen::Matrix<double, 16, 16>> lu(gram);
  if (!lu.isInvertible())
    throw std::invalid_argument("linear_reconstruct: singular measurement set");
  Eigen::Matrix<double, 16, 16> inv = lu.inverse();

  Mat4c rho = Mat4c::Zero();
  for (int i = 0; i < kNumSettings; ++i) {
    Mat4c dual = Mat4c::Zero();
    for (int j = 0; j < kNumSettings; ++j) dual += inv(i, j) * ops[j];
    rho += (counts[i] / total_rate) * dual;
  }
  rho = 0.5 * (rho + rho.adjoint().eval());
  const double tr = rho.trace().real();
  if (std::abs(tr) > 1e-300) rho /= tr;

  Eigen::SelfAdjointEigenSolver<Mat4c> es(rho);
  return LinearInversion{rho, es.eigenvalues().minCoeff()};
}

double best_bell_phase(const TwoQubitDensity& rho) {
  const Mat4c& m = rho.matrix();
  const double base = 0.5 * (m(0, 0).real() + m(3, 3).real());
  const Complex coh = m(0, 3);
  auto fid = [&](double phi) {
    return base + (std::exp(Complex(0.0, phi)) * coh).real();
  };
  // Coarse grid, then one parabolic refinement per halving.
  const int grid = 720;
  double best_phi = 0.0, best_f = -1.0;
  for (int i = 0; i < grid; ++i) {
    const double phi = -M_PI + (2.0 * M_PI * i) / grid;
    const double f = fid(phi);
    if (f > best_f) {
      best_f = f;
      best_phi = phi;
    }
  }
  double h = 2.0 * M_PI / grid;
  for (int iter = 0; iter < 40; ++iter) {
    const double fm = fid(best_phi - h), f0 = fid(best_phi), fp = fid(best_phi + h);
    const double denom = fm - 2.0 * f0 + fp;
    if (std::abs(denom) > 1e-300) {
      const double shift = 0.5 * h * (fm - fp) / denom;
      if (std::abs(shift) < h && fid(best_phi + shift) >= f0)
        best_phi += shift;
    }
    h *= 0.5;
    if (h < 1e-12) break;
  }
  // Fold to (-pi, pi].
  while (best_phi <= -M_PI) best_phi += 2.0 * M_PI;
  while (best_phi > M_PI) best_phi -= 2.0 * M_PI;
  return best_phi;
}

Reconstruction mle_reconstruct(const std::array<double, 16>& counts,
                               const std::array<Mat4c, 16>& ops, Basis basis,
                               const MleOptions& opts) {
  double total = 0.0;
  for (double c : counts) {
    if (c < 0.0)
      throw std::invalid_argument("mle_reconstruct: negative count");
    total += c;
  }
  if (!(total > 0.0))
    throw std::invalid_argument("mle_reconstruct: all counts zero");

  auto cost = [&](const std::vector<double>& t) {
    return mle_cost(t, counts, ops, total);
  };

  // Start 1: clamped linear inversion. Start 2: maximally mixed.
  std::vector<std::vector<double>> starts;
  try {
    starts.push_back(rho_to_cholesky(linear_reconstruct(counts, ops).rho));
  } catch (const std::exception&) {
    // fall through to the mixed start
  }
  starts.push_back(rho_to_cholesky(0.25 * Mat4c::Identity()));

  NelderMeadResult best;
  best.fx = std::numeric_limits<double>::infinity();
  for (const auto& x0 : starts) {
    NelderMeadResult r = nelder_mead(cost, x0, opts.nm);
    if (r.fx < best.fx || (r.fx == best.fx && r.converged && !best.converged))
      best = r;
  }

  Reconstruction rec;
  rec.rho = TwoQubitDensity::trusted(cholesky_to_rho(best.x), basis);
  rec.concurrence = concurrence(rec.rho);
  rec.best_phase_rad = best_bell_phase(rec.rho);
  rec.fidelity_best = fidelity(rec.rho, bell_state(rec.best_phase_rad));
  rec.likelihood = best.fx;
  rec.converged = best.converged;
  return rec;
}

Reconstruction mle_reconstruct(const SettingCounts& counts,
                               const std::array<Mat4c, 16>& ops, Basis basis,
                               const MleOptions& opts) {
  return mle_reconstruct(to_doubles(counts), ops, basis, opts);
}

BootstrapErrors bootstrap_errors(const std::array<double, 16>& counts,
                                 const std::array<Mat4c, 16>& ops,
                                 Basis basis, int n_resamples,
                                 std::uint64_t seed, const MleOptions& opts) {
  if (n_resamples < 100)
    throw std::invalid_argument("bootstrap_errors: need >= 100 resamples");

  std::vector<double> c_vals(n_resamples), f_vals(n_resamples);
  std::vector<int> failed(n_resamples, 0);

  auto worker = [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      auto rng = make_substream(seed, "bootstrap", static_cast<std::uint64_t>(r));
      std::array<double, 16> resampled;
      for (int s = 0; s < kNumSettings; ++s) {
        if (counts[s] > 0.0) {
          std::poisson_distribution<std::int64_t> poi(counts[s]);
          resampled[s] = static_cast<double>(poi(rng));
        } else {
          resampled[s] = 0.0;
        }
      }
      try {
        const Reconstruction rec = mle_reconstruct(resampled, ops, basis, opts);
        c_vals[r] = rec.concurrence;
        f_vals[r] = rec.fidelity_best;
        failed[r] = rec.converged ? 0 : 1;
      } catch (const std::exception&) {
        failed[r] = 1;
        c_vals[r] = 0.0;
        f_vals[r] = 0.0;
      }
    }
  };

  const int n_threads = std::max(
      1, std::min(static_cast<int>(std::thread::hardware_concurrency()), 8));
  std::vector<std::thread> pool;
  const int per = (n_resamples + n_threads - 1) / n_threads;
  for (int t = 0; t < n_threads; ++t) {
    const int begin = t * per;
    const int end = std::min(n_resamples, begin + per);
    if (begin >= end) break;
    pool.emplace_back(worker, begin, end);
  }
  for (std::thread& th : pool) th.join();

  const int n_failed = std::accumulate(failed.begin(), failed.end(), 0);
  if (10 * n_failed > n_resamples)
    throw ConvergenceError("bootstrap_errors: >10% of resamples failed");

  double c_mean = 0.0, f_mean = 0.0;
  int n_ok = 0;
  for (int r = 0; r < n_resamples; ++r) {
    if (failed[r]) continue;
    c_mean += c_vals[r];
    f_mean += f_vals[r];
    ++n_ok;
  }
  c_mean /= n_ok;
  f_mean /= n_ok;
  double c_var = 0.0, f_var = 0.0;
  for (int r = 0; r < n_resamples; ++r) {
    if (failed[r]) continue;
    c_var += (c_vals[r] - c_mean) * (c_vals[r] - c_mean);
    f_var += (f_vals[r] - f_mean) * (f_vals[r] - f_mean);
  }
  BootstrapErrors out;
  out.sigma_concurrence = std::sqrt(c_var / std::max(1, n_ok - 1));
  out.sigma_fidelity = std::sqrt(f_var / std::max(1, n_ok - 1));
  out.n_nonconverged = n_failed;
  return out;
}

TimebinDiscrimination timebin_discriminate(std::span<const TimeTag> tags,
                                           double delta_t_s, double window_s,
                                           bool reject_ambiguous,
                                           double early_margin_s) {
  if (!(delta_t_s > 0.0))
    throw std::invalid_argument("timebin_discriminate: delta_t must be > 0");
  std::vector<std::int64_t> triggers;
  for (const TimeTag& t : tags)
    if (t.channel == channel::kTrigger) triggers.push_back(t.time_ps);
  if (triggers.empty())
    throw std::invalid_argument("timebin_discriminate: no trigger tags");

  const double dt_ps = delta_t_s * 1e12;
  const double win_ps = window_s * 1e12;
  const double margin_ps = early_margin_s * 1e12;

  TimebinDiscrimination out;
  out.category.assign(tags.size(), -1);

  // Per trigger interval, the first middle-window photon on each channel.
  std::int64_t current_pulse = -1;
  std::int64_t cross_xx = -1, cross_x = -1;
  auto flush = [&]() {
    if (current_pulse >= 0 && cross_xx >= 0 && cross_x >= 0)
      out.pairs.push_back(TimebinPairRecord{current_pulse, cross_xx, cross_x});
    cross_xx = cross_x = -1;
  };

  std::size_t trig_idx = 0;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const TimeTag& tag = tags[i];
    if (tag.channel == channel::kTrigger) continue;
    if (tag.channel != channel::kXX && tag.channel != channel::kX) continue;
    // Latest trigger at or before this tag (tags are time-sorted).
    while (trig_idx + 1 < triggers.size() &&
           triggers[trig_idx + 1] <= tag.time_ps)
      ++trig_idx;
    if (triggers[trig_idx] > tag.time_ps) continue;  // before first trigger
    const std::int64_t pulse = static_cast<std::int64_t>(trig_idx);
    if (pulse != current_pulse) {
      flush();
      current_pulse = pulse;
    }
    const double r = static_cast<double>(tag.time_ps - triggers[trig_idx]);
    int best_k = 0;
    double best_d = std::abs(r);
    for (int k = 1; k < 3; ++k) {
      const double d = std::abs(r - k * dt_ps);
      if (d < best_d) {
        best_d = d;
        best_k = k;
      }
    }
    if (reject_ambiguous && best_d > 0.5 * dt_ps) continue;  // stays -1
    out.category[i] = best_k;
    if (tag.channel == channel::kXX)
      ++out.xx_category_counts[static_cast<std::size_t>(best_k)];
    else
      ++out.x_category_counts[static_cast<std::size_t>(best_k)];

    if (best_k == 1) {
      const double rel = r - dt_ps;
      if (rel >= -margin_ps && rel <= win_ps) {
        if (tag.channel == channel::kXX && cross_xx < 0)
          cross_xx = tag.time_ps;
        else if (tag.channel == channel::kX && cross_x < 0)
          cross_x = tag.time_ps;
      }
    }
  }
  flush();
  return out;
}

void write_counts_csv(std::ostream& out, const SettingCounts& counts) {
  out << "setting_a,setting_b,coincidences\n";
  for (const TomographySettingCount& c : counts)
    out << analyzer_letter(c.a) << ',' << analyzer_letter(c.b) << ','
        << c.coincidences << '\n';
}

SettingCounts read_counts_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "setting_a,setting_b,coincidences")
    throw std::runtime_error("counts file: bad or missing header");
  SettingCounts counts;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= kNumSettings)
      throw std::runtime_error("counts file: more than 16 rows");
    std::istringstream ss(line);
    std::string a, b, n;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') ||
        !std::getline(ss, n))
      throw std::runtime_error("counts file: malformed row: " + line);
    counts[row].a = parse_analyzer_label(a);
    counts[row].b = parse_analyzer_label(b);
    counts[row].coincidences = std::stoll(n);
    if (counts[row].coincidences < 0)
      throw std::runtime_error("counts file: negative count");
    ++row;
  }
  if (row != kNumSettings)
    throw std::runtime_error("counts file: expected 16 rows");
  return counts;
}

}  // namespace qdt
