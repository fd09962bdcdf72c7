#pragma once

// Truncated Fock-space and spin operator algebra.
//
// Tensor-factor ordering is fixed as (spin ⊗ z ⊗ x): the basis index of
// |s, n_z, n_x⟩ is s·(dim_z·dim_x) + n_z·dim_x + n_x. Spin level 0 is |↑⟩
// (σ_z = +1). Every builder embeds its single-factor block accordingly.

#include <complex>
#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

namespace tkerr {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class Mode { x, z };
enum class PauliAxis { x, y, z };

/// Population above this in the top two Fock levels of any mode counts as
/// truncation leakage.
inline constexpr double kLeakageThreshold = 1e-8;

struct ModeSpace {
  int dim_x = 2;
  int dim_z = 2;
  bool spin = false;

  /// Throws InvalidSpaceError unless dim_x ≥ 2 and dim_z ≥ 2.
  void validate() const;

  int spin_dim() const { return spin ? 2 : 1; }
  int dim(Mode m) const { return m == Mode::x ? dim_x : dim_z; }
  Eigen::Index total_dim() const {
    return static_cast<Eigen::Index>(dim_x) * dim_z * spin_dim();
  }
  Eigen::Index index(int n_x, int n_z, int spin_level = 0) const {
    return (static_cast<Eigen::Index>(spin_level) * dim_z + n_z) * dim_x + n_x;
  }

  friend bool operator==(const ModeSpace&, const ModeSpace&) = default;
};

/// Single-mode annihilation block: (a)_{n-1,n} = √n.
template <typename Scalar = Complex>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> annihilation_block(int dim) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = Scalar(std::sqrt(static_cast<double>(n)));
  return a;
}

class OperatorMatrix {
 public:
  /// Throws SpaceMismatchError if `entries` is not square of the space's
  /// total dimension.
  OperatorMatrix(const ModeSpace& space, CMatrix entries);

  const ModeSpace& space() const { return space_; }
  const CMatrix& matrix() const { return entries_; }
  Eigen::Index size() const { return entries_.rows(); }

  OperatorMatrix adjoint() const { return {space_, entries_.adjoint()}; }

  /// max |H − H†| relative to max |H| (0 for the zero matrix).
  double hermiticity_defect() const;

  OperatorMatrix& operator+=(const OperatorMatrix& rhs);
  OperatorMatrix& operator-=(const OperatorMatrix& rhs);
  OperatorMatrix& operator*=(Complex s) {
    entries_ *= s;
    return *this;
  }

 private:
  ModeSpace space_;
  CMatrix entries_;
};

OperatorMatrix operator+(OperatorMatrix lhs, const OperatorMatrix& rhs);
OperatorMatrix operator-(OperatorMatrix lhs, const OperatorMatrix& rhs);
OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs);
OperatorMatrix operator*(Complex s, OperatorMatrix op);
OperatorMatrix operator*(double s, OperatorMatrix op);

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

class QuantumState {
 public:
  /// Throws SpaceMismatchError on a length mismatch and std::invalid_argument
  /// if | ‖ψ‖ − 1 | exceeds `norm_tolerance`.
  QuantumState(const ModeSpace& space, CVector amplitudes,
               double norm_tolerance = 1e-10);

  const ModeSpace& space() const { return space_; }
  const CVector& amplitudes() const { return amplitudes_; }
  double norm() const { return amplitudes_.norm(); }

 private:
  ModeSpace space_;
  CVector amplitudes_;
};

// Builders. All validate the space first.
OperatorMatrix identity(const ModeSpace& space);
OperatorMatrix ladder(const ModeSpace& space, Mode mode);
OperatorMatrix number(const ModeSpace& space, Mode mode);
/// Throws InvalidSpaceError when the space carries no spin factor.
OperatorMatrix pauli(const ModeSpace& space, PauliAxis axis);
/// Embeds a single-mode block (dim(mode) square) with identities on the
/// other factors.
OperatorMatrix mode_operator(const ModeSpace& space, Mode mode, const CMatrix& block);

/// Fock product state |s, n_z, n_x⟩.
QuantumState fock_state(const ModeSpace& space, int n_x, int n_z, int spin_level = 0);

/// Coherent state |α⟩ in `mode`, vacuum elsewhere (spin up if present),
/// renormalized after truncation. Throws TruncationLeakageError when the top
/// two Fock levels carry more than kLeakageThreshold of the population.
QuantumState coherent_state(const ModeSpace& space, Mode mode, Complex alpha);

/// ⟨ψ|Ô|ψ⟩.
Complex expectation(const QuantumState& state, const OperatorMatrix& op);

/// Population in the top `levels` Fock levels of `mode`, never including
/// the ground level.
double top_level_population(const CVector& amplitudes, const ModeSpace& space,
                            Mode mode, int levels = 2);
/// Largest top-two-level population over both modes.
double leakage(const CVector& amplitudes, const ModeSpace& space);
inline double leakage(const QuantumState& s) { return leakage(s.amplitudes(), s.space()); }

/// Restriction of an operator on a larger space to the lower Fock levels of
/// `target` (same spin structure, smaller or equal mode dimensions).
OperatorMatrix restrict_to(const OperatorMatrix& op, const ModeSpace& target);

/// Zero-padding embedding of a state into a larger space.
QuantumState embed(const QuantumState& state, const ModeSpace& target);

}  // namespace tkerr
