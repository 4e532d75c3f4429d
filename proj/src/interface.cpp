#include "qdt/interface.hpp"

#include <cmath>
#include <stdexcept>

namespace qdt {

void InterfaceConfig::validate() const {
  if (!(delta_t_s > 0.0))
    throw std::invalid_argument("interface: delta_t_s must be > 0");
  if (!(transmission_short >= 0.0 && transmission_short <= 1.0) ||
      !(transmission_long >= 0.0 && transmission_long <= 1.0))
    throw std::invalid_argument("interface: transmissions must be in [0,1]");
}

ConvertResult convert(const TwoQubitDensity& rho_pol,
                      const InterfaceConfig& cfg) {
  if (rho_pol.basis() != Basis::Polarization)
    throw std::invalid_argument("convert: input must be in polarization basis");
  cfg.validate();

  // Per-photon map onto the polarizer axis: the H component takes the short
  // path (early bin), the V component the long path (late bin, phase
  // theta_fwd). The polarizer projects both onto one polarization, so each
  // photon keeps only a scalar amplitude per bin.
  const double ang = cfg.polarizer_angle_deg * M_PI / 180.0;
  Mat2c k = Mat2c::Zero();
  k(0, 0) = std::cos(ang) * std::sqrt(cfg.transmission_short);
  k(1, 1) = std::sin(ang) * std::sqrt(cfg.transmission_long) *
            std::exp(Complex(0.0, cfg.theta_fwd_rad));

  Mat4c kk;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) kk.block<2, 2>(2 * i, 2 * j) = k(i, j) * k;

  Mat4c m = kk * rho_pol.matrix() * kk.adjoint();
  const double transmission = m.trace().real();
  if (!(transmission > 0.0))
    throw std::invalid_argument("convert: state fully absorbed");
  m /= transmission;
  return ConvertResult{TwoQubitDensity::trusted(m, Basis::TimeBin),
                       transmission};
}

CategoryOutcome backward_pass_category(const TimeBinPhoton& photon,
                                       const InterfaceConfig& cfg,
                                       std::mt19937_64& rng) {
  // Four equal-weight path pairs (bin, return path); the two middle slots
  // overlap into the cross category.
  const double p_early = std::norm(photon.bin_amplitudes(0)) /
                         photon.bin_amplitudes.squaredNorm();
  const double p_ss = 0.5 * p_early;
  const double p_cross = 0.5;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u = uni(rng);

  PathCategory cat;
  double offset;
  if (u < p_ss) {
    cat = PathCategory::ShortShort;
    offset = 0.0;
  } else if (u < p_ss + p_cross) {
    cat = PathCategory::Cross;
    offset = cfg.delta_t_s;
  } else {
    cat = PathCategory::LongLong;
    offset = 2.0 * cfg.delta_t_s;
  }
  return CategoryOutcome{cat, photon.nominal_time_s + offset};
}

Mat2c timebin_analysis_map(double theta_back_rad) {
  // |e> -> e^{i theta_back} |V> (long path back), |l> -> |H> (short path).
  Mat2c u = Mat2c::Zero();
  u(1, 0) = std::exp(Complex(0.0, theta_back_rad));
  u(0, 1) = 1.0;
  return u;
}

TwoQubitDensity effective_timebin_projector(const Analyzer& a,
                                            const Analyzer& b,
                                            const InterfaceConfig& cfg) {
  const Mat2c u = timebin_analysis_map(cfg.theta_back_rad);
  const Vec2c ja = u.adjoint() * a.jones;
  const Vec2c jb = u.adjoint() * b.jones;
  Vec4c ket;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) ket(2 * i + j) = ja(i) * jb(j);
  return TwoQubitDensity::trusted(ket * ket.adjoint(), Basis::TimeBin);
}

}  // namespace qdt
