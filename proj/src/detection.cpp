#include "qdt/detection.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

#include "qdt/rng.hpp"

namespace qdt {

namespace {

constexpr double kFwhmToSigma = 1.0 / 2.355;
constexpr std::size_t kChunkPhotons = 1 << 16;

std::int64_t to_ps(double t_s) {
  return static_cast<std::int64_t>(std::llround(t_s * 1e12));
}

}  // namespace

void DetectorConfig::validate() const {
  for (double e : efficiency)
    if (!(e >= 0.0 && e <= 1.0))
      throw std::invalid_argument("detector: efficiency must be in [0,1]");
  if (!(jitter_fwhm_s >= 0.0))
    throw std::invalid_argument("detector: jitter_fwhm_s must be >= 0");
  if (!(dark_rate_hz >= 0.0))
    throw std::invalid_argument("detector: dark_rate_hz must be >= 0");
  if (!(dead_time_s >= 0.0))
    throw std::invalid_argument("detector: dead_time_s must be >= 0");
}

std::vector<TimeTag> detect(const std::vector<PhotonEvent>& photons,
                            const DetectorConfig& cfg, double span_s,
                            std::uint64_t seed) {
  cfg.validate();
  const double sigma = cfg.jitter_fwhm_s * kFwhmToSigma;

  std::vector<TimeTag> tags;
  tags.reserve(photons.size());

  // Chunked over the input so partitions can be regenerated independently.
  for (std::size_t chunk = 0; chunk * kChunkPhotons < photons.size() || chunk == 0;
       ++chunk) {
    auto rng = make_substream(seed, "detection", chunk);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t begin = chunk * kChunkPhotons;
    const std::size_t end = std::min(photons.size(), begin + kChunkPhotons);
    for (std::size_t i = begin; i < end; ++i) {
      const PhotonEvent& ph = photons[i];
      if (ph.channel < 0 || ph.channel > 1)
        throw std::invalid_argument("detect: photon channel must be 0 or 1");
      const double p = cfg.efficiency[ph.channel] * ph.weight;
      if (uni(rng) >= p) continue;
      double t = ph.time_s;
      if (sigma > 0.0) t += sigma * gauss(rng);
      if (t < 0.0) continue;
      tags.push_back(TimeTag{ph.channel, to_ps(t)});
    }
    if (photons.empty()) break;
  }

  if (cfg.dark_rate_hz > 0.0 && span_s > 0.0) {
    auto rng = make_substream(seed, "darkcounts", 0);
    std::exponential_distribution<double> gap(cfg.dark_rate_hz);
    for (int ch = 0; ch < 2; ++ch) {
      double t = gap(rng);
      while (t < span_s) {
        tags.push_back(TimeTag{ch, to_ps(t)});
        t += gap(rng);
      }
    }
  }

  sort_tags(tags);

  if (cfg.dead_time_s > 0.0) {
    const std::int64_t dead_ps = to_ps(cfg.dead_time_s);
    std::array<std::int64_t, 2> last{std::numeric_limits<std::int64_t>::min(),
                                     std::numeric_limits<std::int64_t>::min()};
    std::vector<TimeTag> kept;
    kept.reserve(tags.size());
    for (const TimeTag& tag : tags) {
      if (tag.time_ps - last[tag.channel] < dead_ps &&
          last[tag.channel] != std::numeric_limits<std::int64_t>::min())
        continue;
      last[tag.channel] = tag.time_ps;
      kept.push_back(tag);
    }
    tags.swap(kept);
  }
  return tags;
}

std::vector<TimeTag> emit_trigger_tags(double rep_rate_hz,
                                       std::int64_t n_pulses) {
  if (!(rep_rate_hz > 0.0))
    throw std::invalid_argument("emit_trigger_tags: rep_rate_hz must be > 0");
  if (n_pulses < 0)
    throw std::invalid_argument("emit_trigger_tags: n_pulses < 0");
  const double period_ps = 1e12 / rep_rate_hz;
  std::vector<TimeTag> tags;
  tags.reserve(static_cast<std::size_t>(n_pulses));
  for (std::int64_t k = 0; k < n_pulses; ++k)
    tags.push_back(TimeTag{channel::kTrigger,
                           static_cast<std::int64_t>(std::llround(
                               static_cast<double>(k) * period_ps))});
  return tags;
}

void sort_tags(std::vector<TimeTag>& tags) {
  std::stable_sort(tags.begin(), tags.end(),
                   [](const TimeTag& a, const TimeTag& b) {
                     if (a.time_ps != b.time_ps) return a.time_ps < b.time_ps;
                     return a.channel < b.channel;
                   });
}

void write_tags_csv(std::ostream& out, const std::vector<TimeTag>& tags) {
  out << "channel,time_ps\n";
  for (const TimeTag& tag : tags)
    out << tag.channel << ',' << tag.time_ps << '\n';
}

std::vector<TimeTag> read_tags_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "channel,time_ps")
    throw std::runtime_error("tag file: bad or missing header");
  std::vector<TimeTag> tags;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("tag file: malformed row: " + line);
    TimeTag tag;
    tag.channel = std::stoi(line.substr(0, comma));
    tag.time_ps = std::stoll(line.substr(comma + 1));
    if (tag.time_ps < 0) throw std::runtime_error("tag file: negative time");
    tags.push_back(tag);
  }
  return tags;
}

}  // namespace qdt
