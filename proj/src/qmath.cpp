#include "qdt/qmath.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace qdt {

namespace {

constexpr double kHermTol = 1e-9;
constexpr double kTraceTol = 1e-9;
constexpr double kEigTol = 1e-9;

// sigma_y (x) sigma_y, real-valued in this basis.
Mat4c spin_flip_matrix() {
  Mat4c s = Mat4c::Zero();
  s(0, 3) = -1.0;
  s(1, 2) = 1.0;
  s(2, 1) = 1.0;
  s(3, 0) = -1.0;
  return s;
}

Mat4c matrix_sqrt_psd(const Mat4c& m) {
  Eigen::SelfAdjointEigenSolver<Mat4c> es(m);
  Eigen::Vector4d ev = es.eigenvalues();
  for (int i = 0; i < 4; ++i) ev(i) = std::sqrt(std::max(0.0, ev(i)));
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

const char* basis_name(Basis b) {
  return b == Basis::Polarization ? "polarization" : "timebin";
}

Basis parse_basis(const std::string& name) {
  if (name == "polarization") return Basis::Polarization;
  if (name == "timebin") return Basis::TimeBin;
  throw std::invalid_argument("unknown basis label: " + name);
}

TwoQubitState::TwoQubitState(const Vec4c& amplitudes) : amps_(amplitudes) {
  const double n = amps_.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    throw std::invalid_argument("TwoQubitState: amplitudes not normalizable");
  amps_ /= n;
}

TwoQubitState bell_state(double phase) {
  if (!std::isfinite(phase))
    throw std::invalid_argument("bell_state: non-finite phase");
  Vec4c a = Vec4c::Zero();
  a(0) = 1.0 / std::sqrt(2.0);
  a(3) = std::exp(Complex(0.0, phase)) / std::sqrt(2.0);
  return TwoQubitState(a);
}

TwoQubitDensity::TwoQubitDensity(const Mat4c& m, Basis basis)
    : m_(m), basis_(basis) {
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kHermTol)
    throw std::invalid_argument("TwoQubitDensity: not Hermitian");
  m_ = 0.5 * (m_ + m_.adjoint().eval());
  if (std::abs(m_.trace() - Complex(1.0, 0.0)) > kTraceTol)
    throw std::invalid_argument("TwoQubitDensity: trace != 1");
  Eigen::SelfAdjointEigenSolver<Mat4c> es(m_);
  if (es.eigenvalues().minCoeff() < -kEigTol)
    throw std::invalid_argument("TwoQubitDensity: negative eigenvalue");
}

TwoQubitDensity TwoQubitDensity::pure(const TwoQubitState& psi, Basis basis) {
  return trusted(psi.amplitudes() * psi.amplitudes().adjoint(), basis);
}

TwoQubitDensity TwoQubitDensity::maximally_mixed(Basis basis) {
  return trusted(0.25 * Mat4c::Identity(), basis);
}

TwoQubitDensity TwoQubitDensity::trusted(const Mat4c& m, Basis basis) {
  TwoQubitDensity rho;
  rho.m_ = 0.5 * (m + m.adjoint().eval());
  rho.basis_ = basis;
  return rho;
}

double TwoQubitDensity::purity() const {
  return (m_ * m_).trace().real();
}

Analyzer Analyzer::make(AnalyzerLabel label) {
  const double s = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  Vec2c j;
  switch (label) {
    case AnalyzerLabel::H: j << 1.0, 0.0; break;
    case AnalyzerLabel::V: j << 0.0, 1.0; break;
    case AnalyzerLabel::D: j << s, s; break;
    case AnalyzerLabel::A: j << s, -s; break;
    case AnalyzerLabel::R: j << s, i * s; break;
    case AnalyzerLabel::L: j << s, -i * s; break;
    default: throw std::invalid_argument("Analyzer: bad label");
  }
  return Analyzer{label, j};
}

AnalyzerLabel parse_analyzer_label(const std::string& letter) {
  if (letter.size() == 1) {
    switch (std::toupper(static_cast<unsigned char>(letter[0]))) {
      case 'H': return AnalyzerLabel::H;
      case 'V': return AnalyzerLabel::V;
      case 'D': return AnalyzerLabel::D;
      case 'A': return AnalyzerLabel::A;
      case 'L': return AnalyzerLabel::L;
      case 'R': return AnalyzerLabel::R;
      default: break;
    }
  }
  throw std::invalid_argument("unknown analyzer label: " + letter);
}

char analyzer_letter(AnalyzerLabel label) {
  switch (label) {
    case AnalyzerLabel::H: return 'H';
    case AnalyzerLabel::V: return 'V';
    case AnalyzerLabel::D: return 'D';
    case AnalyzerLabel::A: return 'A';
    case AnalyzerLabel::L: return 'L';
    case AnalyzerLabel::R: return 'R';
  }
  return '?';
}

Analyzer Analyzer::parse(const std::string& letter) {
  return make(parse_analyzer_label(letter));
}

char Analyzer::letter() const { return analyzer_letter(label); }

TwoQubitDensity projector(const Analyzer& a, const Analyzer& b, Basis basis) {
  Vec4c ket;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) ket(2 * i + j) = a.jones(i) * b.jones(j);
  return TwoQubitDensity::trusted(ket * ket.adjoint(), basis);
}

double fidelity(const TwoQubitDensity& rho, const TwoQubitState& psi) {
  const Complex f = psi.amplitudes().adjoint() * rho.matrix() * psi.amplitudes();
  return std::clamp(f.real(), 0.0, 1.0);
}

double concurrence(const TwoQubitDensity& rho) {
  static const Mat4c s = spin_flip_matrix();
  const Mat4c sqrt_rho = matrix_sqrt_psd(rho.matrix());
  const Mat4c flipped = s * rho.matrix().conjugate() * s;
  Mat4c m = sqrt_rho * flipped * sqrt_rho;
  m = 0.5 * (m + m.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Mat4c> es(m);
  Eigen::Vector4d ev = es.eigenvalues();  // ascending
  double lambda[4];
  for (int i = 0; i < 4; ++i) lambda[i] = std::sqrt(std::max(0.0, ev(3 - i)));
  const double c = lambda[0] - lambda[1] - lambda[2] - lambda[3];
  return std::clamp(c, 0.0, 1.0);
}

TwoQubitDensity werner(double p, double phase) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("werner: p outside [0,1]");
  const TwoQubitState psi = bell_state(phase);
  const Mat4c m = p * (psi.amplitudes() * psi.amplitudes().adjoint()) +
                  (1.0 - p) * 0.25 * Mat4c::Identity();
  return TwoQubitDensity::trusted(m, Basis::Polarization);
}

BasisRelabel BasisRelabel::identity(Basis target) {
  return BasisRelabel{Mat4c::Identity(), target};
}

BasisRelabel BasisRelabel::local(const Mat2c& u, Basis target) {
  Mat4c big;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      big.block<2, 2>(2 * i, 2 * j) = u(i, j) * u;
  return BasisRelabel{big, target};
}

BasisRelabel BasisRelabel::permutation_with_phases(
    const std::array<int, 4>& perm, const std::array<double, 4>& phases,
    Basis target) {
  Mat4c u = Mat4c::Zero();
  for (int k = 0; k < 4; ++k) {
    if (perm[k] < 0 || perm[k] > 3)
      throw std::invalid_argument("BasisRelabel: bad permutation index");
    u(perm[k], k) = std::exp(Complex(0.0, phases[perm[k]]));
  }
  return BasisRelabel{u, target};
}

TwoQubitDensity relabel_basis(const TwoQubitDensity& rho,
                              const BasisRelabel& map) {
  const Mat4c& u = map.unitary;
  if ((u * u.adjoint() - Mat4c::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("relabel_basis: map is not unitary");
  return TwoQubitDensity::trusted(u * rho.matrix() * u.adjoint(), map.target);
}

double trace_distance(const Mat4c& a, const Mat4c& b) {
  Mat4c d = a - b;
  d = 0.5 * (d + d.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Mat4c> es(d);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const TwoQubitDensity& a, const TwoQubitDensity& b) {
  return trace_distance(a.matrix(), b.matrix());
}

std::string format_complex(Complex z) {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%.17g%+.17gj", z.real(), z.imag());
  return buf;
}

Complex parse_complex(const std::string& token) {
  const char* p = token.c_str();
  char* end = nullptr;
  const double re = std::strtod(p, &end);
  if (end == p) throw std::invalid_argument("bad complex entry: " + token);
  char* end2 = nullptr;
  const double im = std::strtod(end, &end2);
  if (end2 == end || *end2 != 'j')
    throw std::invalid_argument("bad complex entry: " + token);
  return Complex(re, im);
}

std::string to_text(const TwoQubitDensity& rho) {
  std::ostringstream out;
  out << "basis " << basis_name(rho.basis()) << "\n";
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (j) out << ' ';
      out << format_complex(rho.matrix()(i, j));
    }
    out << "\n";
  }
  return out.str();
}

TwoQubitDensity density_from_stream(std::istream& in) {
  std::string word;
  if (!(in >> word) || word != "basis")
    throw std::invalid_argument("density text: missing basis header");
  std::string label;
  in >> label;
  const Basis basis = parse_basis(label);
  Mat4c m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (!(in >> word))
        throw std::invalid_argument("density text: truncated matrix");
      m(i, j) = parse_complex(word);
    }
  return TwoQubitDensity(m, basis);  // validating constructor
}

TwoQubitDensity density_from_text(const std::string& text) {
  std::istringstream in(text);
  return density_from_stream(in);
}

}  // namespace qdt
