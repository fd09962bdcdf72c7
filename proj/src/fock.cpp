#include "tkerr/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "tkerr/errors.hpp"

namespace tkerr {
namespace {

std::string describe(const ModeSpace& s) {
  std::ostringstream os;
  os << "(dim_x=" << s.dim_x << ", dim_z=" << s.dim_z << ", spin=" << (s.spin ? "yes" : "no")
     << ")";
  return os.str();
}

void require_same_space(const ModeSpace& a, const ModeSpace& b, const char* where) {
  if (!(a == b)) {
    throw SpaceMismatchError(std::string(where) + ": space " + describe(a) +
                             " does not match " + describe(b));
  }
}

// spin ⊗ z ⊗ x
CMatrix embed_blocks(const ModeSpace& s, const CMatrix& spin_block, const CMatrix& z_block,
                     const CMatrix& x_block) {
  CMatrix zx = Eigen::kroneckerProduct(z_block, x_block).eval();
  if (!s.spin) return zx;
  return Eigen::kroneckerProduct(spin_block, zx).eval();
}

CMatrix eye(int n) { return CMatrix::Identity(n, n); }

CMatrix mode_embedding(const ModeSpace& s, Mode mode, const CMatrix& block) {
  if (mode == Mode::x) return embed_blocks(s, eye(s.spin_dim()), eye(s.dim_z), block);
  return embed_blocks(s, eye(s.spin_dim()), block, eye(s.dim_x));
}

}  // namespace

void ModeSpace::validate() const {
  if (dim_x < 2 || dim_z < 2) {
    throw InvalidSpaceError("mode space " + describe(*this) +
                            " invalid: each Fock truncation must be at least 2");
  }
}

OperatorMatrix::OperatorMatrix(const ModeSpace& space, CMatrix entries)
    : space_(space), entries_(std::move(entries)) {
  const auto n = space_.total_dim();
  if (entries_.rows() != n || entries_.cols() != n) {
    std::ostringstream os;
    os << "operator of size " << entries_.rows() << "x" << entries_.cols()
       << " does not fit space " << describe(space_) << " of dimension " << n;
    throw SpaceMismatchError(os.str());
  }
}

double OperatorMatrix::hermiticity_defect() const {
  const double scale = entries_.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() / scale;
}

OperatorMatrix& OperatorMatrix::operator+=(const OperatorMatrix& rhs) {
  require_same_space(space_, rhs.space_, "operator+");
  entries_ += rhs.entries_;
  return *this;
}

OperatorMatrix& OperatorMatrix::operator-=(const OperatorMatrix& rhs) {
  require_same_space(space_, rhs.space_, "operator-");
  entries_ -= rhs.entries_;
  return *this;
}

OperatorMatrix operator+(OperatorMatrix lhs, const OperatorMatrix& rhs) { return lhs += rhs; }
OperatorMatrix operator-(OperatorMatrix lhs, const OperatorMatrix& rhs) { return lhs -= rhs; }

OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
  require_same_space(lhs.space(), rhs.space(), "operator*");
  return {lhs.space(), lhs.matrix() * rhs.matrix()};
}

OperatorMatrix operator*(Complex s, OperatorMatrix op) { return op *= s; }
OperatorMatrix operator*(double s, OperatorMatrix op) { return op *= Complex(s); }

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_space(a.space(), b.space(), "commutator");
  return {a.space(), a.matrix() * b.matrix() - b.matrix() * a.matrix()};
}

QuantumState::QuantumState(const ModeSpace& space, CVector amplitudes, double norm_tolerance)
    : space_(space), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != space_.total_dim()) {
    throw SpaceMismatchError("state of length " + std::to_string(amplitudes_.size()) +
                             " does not fit space " + describe(space_));
  }
  const double drift = std::abs(amplitudes_.norm() - 1.0);
  if (drift > norm_tolerance) {
    throw std::invalid_argument("state is not normalized: | |psi| - 1 | = " +
                                std::to_string(drift));
  }
}

OperatorMatrix identity(const ModeSpace& space) {
  space.validate();
  return {space, CMatrix::Identity(space.total_dim(), space.total_dim())};
}

OperatorMatrix ladder(const ModeSpace& space, Mode mode) {
  space.validate();
  return {space, mode_embedding(space, mode, annihilation_block(space.dim(mode)))};
}

OperatorMatrix number(const ModeSpace& space, Mode mode) {
  space.validate();
  const int d = space.dim(mode);
  CMatrix block = CMatrix::Zero(d, d);
  for (int n = 0; n < d; ++n) block(n, n) = static_cast<double>(n);
  return {space, mode_embedding(space, mode, block)};
}

OperatorMatrix mode_operator(const ModeSpace& space, Mode mode, const CMatrix& block) {
  space.validate();
  if (block.rows() != space.dim(mode) || block.cols() != space.dim(mode)) {
    throw SpaceMismatchError("single-mode block does not match the mode truncation of " +
                             describe(space));
  }
  return {space, mode_embedding(space, mode, block)};
}

OperatorMatrix pauli(const ModeSpace& space, PauliAxis axis) {
  space.validate();
  if (!space.spin) {
    throw InvalidSpaceError("Pauli operator requested on space " + describe(space) +
                            " without a spin factor");
  }
  CMatrix sigma(2, 2);
  const Complex i(0.0, 1.0);
  switch (axis) {
    case PauliAxis::x: sigma << 0.0, 1.0, 1.0, 0.0; break;
    case PauliAxis::y: sigma << 0.0, -i, i, 0.0; break;
    case PauliAxis::z: sigma << 1.0, 0.0, 0.0, -1.0; break;
  }
  return {space, embed_blocks(space, sigma, eye(space.dim_z), eye(space.dim_x))};
}

QuantumState fock_state(const ModeSpace& space, int n_x, int n_z, int spin_level) {
  space.validate();
  if (n_x < 0 || n_x >= space.dim_x || n_z < 0 || n_z >= space.dim_z || spin_level < 0 ||
      spin_level >= space.spin_dim()) {
    throw InvalidSpaceError("Fock state outside truncation of " + describe(space));
  }
  CVector psi = CVector::Zero(space.total_dim());
  psi(space.index(n_x, n_z, spin_level)) = 1.0;
  return {space, std::move(psi)};
}

QuantumState coherent_state(const ModeSpace& space, Mode mode, Complex alpha) {
  space.validate();
  const int d = space.dim(mode);
  CVector c(d);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < d; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  const double total = c.squaredNorm();
  const double top = c.tail(std::min(2, d - 1)).squaredNorm() / total;
  if (top > kLeakageThreshold) {
    std::ostringstream os;
    os << "coherent state |alpha|=" << std::abs(alpha) << " leaks " << top
       << " of its population into the top two levels of a dimension-" << d << " mode";
    throw TruncationLeakageError(os.str());
  }
  c /= std::sqrt(total);

  CVector psi = CVector::Zero(space.total_dim());
  for (int n = 0; n < d; ++n) {
    psi(mode == Mode::x ? space.index(n, 0) : space.index(0, n)) = c(n);
  }
  return {space, std::move(psi)};
}

Complex expectation(const QuantumState& state, const OperatorMatrix& op) {
  require_same_space(state.space(), op.space(), "expectation");
  return state.amplitudes().dot(op.matrix() * state.amplitudes());
}

double top_level_population(const CVector& amplitudes, const ModeSpace& space, Mode mode,
                            int levels) {
  // The ground level never counts as leaked, so a two-level mode is
  // monitored through its upper level only.
  const int first = std::max(1, space.dim(mode) - levels);
  double p = 0.0;
  for (int s = 0; s < space.spin_dim(); ++s) {
    for (int nz = 0; nz < space.dim_z; ++nz) {
      for (int nx = 0; nx < space.dim_x; ++nx) {
        const int n = mode == Mode::x ? nx : nz;
        if (n >= first) p += std::norm(amplitudes(space.index(nx, nz, s)));
      }
    }
  }
  return p;
}

double leakage(const CVector& amplitudes, const ModeSpace& space) {
  return std::max(top_level_population(amplitudes, space, Mode::x),
                  top_level_population(amplitudes, space, Mode::z));
}

OperatorMatrix restrict_to(const OperatorMatrix& op, const ModeSpace& target) {
  target.validate();
  const ModeSpace& src = op.space();
  if (src.spin != target.spin || target.dim_x > src.dim_x || target.dim_z > src.dim_z) {
    throw SpaceMismatchError("cannot restrict " + describe(src) + " to " + describe(target));
  }
  const auto n = target.total_dim();
  std::vector<Eigen::Index> map;
  map.reserve(n);
  for (int s = 0; s < target.spin_dim(); ++s)
    for (int nz = 0; nz < target.dim_z; ++nz)
      for (int nx = 0; nx < target.dim_x; ++nx) map.push_back(src.index(nx, nz, s));
  return {target, op.matrix()(map, map)};
}

QuantumState embed(const QuantumState& state, const ModeSpace& target) {
  target.validate();
  const ModeSpace& src = state.space();
  if (src.spin != target.spin || target.dim_x < src.dim_x || target.dim_z < src.dim_z) {
    throw SpaceMismatchError("cannot embed " + describe(src) + " into " + describe(target));
  }
  CVector psi = CVector::Zero(target.total_dim());
  for (int s = 0; s < src.spin_dim(); ++s)
    for (int nz = 0; nz < src.dim_z; ++nz)
      for (int nx = 0; nx < src.dim_x; ++nx)
        psi(target.index(nx, nz, s)) = state.amplitudes()(src.index(nx, nz, s));
  return {target, std::move(psi), std::abs(state.norm() - 1.0) + 1e-12};
}

}  // namespace tkerr
