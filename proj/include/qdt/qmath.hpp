#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <iosfwd>
#include <string>

// Two-qubit linear algebra for the photon-pair analysis chain: states,
// density matrices, analyzer projectors and the entanglement measures
// (concurrence, fidelity) evaluated on them.
//
// Basis ordering is fixed throughout: {HH, HV, VH, VV} in polarization,
// {ee, el, le, ll} in time bin. First letter = XX photon, second = X photon.

namespace qdt {

using Complex = std::complex<double>;
using Vec2c = Eigen::Vector2cd;
using Vec4c = Eigen::Vector4cd;
using Mat2c = Eigen::Matrix2cd;
using Mat4c = Eigen::Matrix4cd;

enum class Basis { Polarization, TimeBin };

const char* basis_name(Basis b);
Basis parse_basis(const std::string& name);

/// Pure two-qubit state. Amplitudes are renormalized on construction;
/// a zero vector is rejected.
class TwoQubitState {
 public:
  explicit TwoQubitState(const Vec4c& amplitudes);

  const Vec4c& amplitudes() const { return amps_; }
  Complex amplitude(int i) const { return amps_(i); }

 private:
  Vec4c amps_;
};

/// (|00> + e^{i phase} |11>)/sqrt(2) in the current basis ordering,
/// i.e. (|HH> + e^{i phase} |VV>)/sqrt(2).
TwoQubitState bell_state(double phase);

/// 4x4 density matrix. The constructor enforces physicality:
/// Hermitian within 1e-9, unit trace within 1e-9, eigenvalues >= -1e-9.
class TwoQubitDensity {
 public:
  TwoQubitDensity(const Mat4c& m, Basis basis);

  static TwoQubitDensity pure(const TwoQubitState& psi,
                              Basis basis = Basis::Polarization);
  static TwoQubitDensity maximally_mixed(Basis basis = Basis::Polarization);
  /// Bypasses validation; for internal construction of matrices that are
  /// physical by algebra (projectors, convex mixtures, unitary conjugates).
  static TwoQubitDensity trusted(const Mat4c& m, Basis basis);

  const Mat4c& matrix() const { return m_; }
  Basis basis() const { return basis_; }
  double purity() const;

 private:
  TwoQubitDensity() = default;
  Mat4c m_;
  Basis basis_ = Basis::Polarization;
};

enum class AnalyzerLabel { H, V, D, A, L, R };

/// Single-photon analyzer setting. Jones vectors use the fixed convention
/// D=(H+V)/sqrt2, A=(H-V)/sqrt2, R=(H+iV)/sqrt2, L=(H-iV)/sqrt2.
struct Analyzer {
  AnalyzerLabel label;
  Vec2c jones;

  static Analyzer make(AnalyzerLabel label);
  static Analyzer parse(const std::string& letter);
  char letter() const;
};

AnalyzerLabel parse_analyzer_label(const std::string& letter);
char analyzer_letter(AnalyzerLabel label);

/// Rank-1 projector |a><a| (x) |b><b|. Idempotent, trace 1.
TwoQubitDensity projector(const Analyzer& a, const Analyzer& b,
                          Basis basis = Basis::Polarization);

/// F = <psi| rho |psi>, real in [0,1].
double fidelity(const TwoQubitDensity& rho, const TwoQubitState& psi);

/// Spin-flip concurrence C = max(0, l1-l2-l3-l4) where the l_i are the
/// descending square roots of the eigenvalues of rho (sy x sy) rho* (sy x sy).
/// Computed from the Hermitian similarity sqrt(rho) (sy x sy) rho* (sy x sy)
/// sqrt(rho) so the eigenproblem stays self-adjoint.
double concurrence(const TwoQubitDensity& rho);

/// p |bell(phase)><bell(phase)| + (1-p) I/4. Throws on p outside [0,1].
TwoQubitDensity werner(double p, double phase = 0.0);

/// Unitary basis relabeling (permutation-times-phase maps and per-photon
/// local maps). Conjugation preserves spectrum and concurrence.
struct BasisRelabel {
  Mat4c unitary;
  Basis target;

  static BasisRelabel identity(Basis target);
  /// u applied to each photon: U = u (x) u.
  static BasisRelabel local(const Mat2c& u, Basis target);
  /// U = diag(e^{i phases}) * P with P the basis permutation
  /// |k> -> |perm[k]>.
  static BasisRelabel permutation_with_phases(const std::array<int, 4>& perm,
                                              const std::array<double, 4>& phases,
                                              Basis target);
};

/// rho -> U rho U^dagger with the target basis label. Throws if the map is
/// not unitary within 1e-9.
TwoQubitDensity relabel_basis(const TwoQubitDensity& rho,
                              const BasisRelabel& map);

/// 0.5 * sum |eig(a - b)|.
double trace_distance(const Mat4c& a, const Mat4c& b);
double trace_distance(const TwoQubitDensity& a, const TwoQubitDensity& b);

// Text serialization: header line "basis <label>", then 4 rows of 4
// whitespace-separated entries formatted "re+imj", row-major.
std::string to_text(const TwoQubitDensity& rho);
TwoQubitDensity density_from_text(const std::string& text);
TwoQubitDensity density_from_stream(std::istream& in);

std::string format_complex(Complex z);
Complex parse_complex(const std::string& token);

}  // namespace qdt
