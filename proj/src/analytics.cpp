#include "tkerr/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseCore>
#include <unsupported/Eigen/MatrixFunctions>

#include "tkerr/errors.hpp"

namespace tkerr {

OperatorMatrix time_average(const std::vector<HarmonicTerm>& terms) {
  if (terms.empty()) throw IllDefinedAverageError("time_average needs at least one term");
  const ModeSpace& space = terms.front().op.space();

  double max_freq = 0.0;
  for (const auto& term : terms) {
    if (!(term.op.space() == space)) {
      throw SpaceMismatchError("time_average: terms live on different spaces");
    }
    if (term.freq == 0.0 || !std::isfinite(term.freq)) {
      std::ostringstream os;
      os << "time_average: term frequency " << term.freq << " has no well-defined average";
      throw IllDefinedAverageError(os.str());
    }
    max_freq = std::max(max_freq, std::abs(term.freq));
  }
  const double secular_tol = 1e-9 * max_freq;

  // The terms are products of ladder operators, so sparse products are far
  // cheaper than dense ones.
  using Sparse = Eigen::SparseMatrix<Complex>;
  std::vector<Sparse> ops;
  std::vector<Sparse> adjoints;
  for (const auto& term : terms) {
    ops.push_back(term.op.matrix().sparseView());
    adjoints.push_back(ops.back().adjoint());
  }

  const auto n = space.total_dim();
  CMatrix h = CMatrix::Zero(n, n);
  for (std::size_t m = 0; m < terms.size(); ++m) {
    for (std::size_t k = 0; k < terms.size(); ++k) {
      if (std::abs(terms[m].freq - terms[k].freq) >= secular_tol) continue;
      const double weight = 0.5 * (1.0 / terms[m].freq + 1.0 / terms[k].freq);
      const Sparse c = ops[m] * adjoints[k] - adjoints[k] * ops[m];
      h += weight * CMatrix(c);
    }
  }
  return {space, std::move(h)};
}

OperatorMatrix averaged_hamiltonian(const TrapConfig& trap, const DriveConfig& drive,
                                    const ModeSpace& space) {
  space.validate();
  const ModeSpace padded{space.dim_x + 2, space.dim_z + 1, space.spin};
  return restrict_to(time_average(interaction_terms(trap, drive, padded)), space);
}

OperatorMatrix kerr_unitary(double K, double omega_eff, double t, const ModeSpace& space) {
  space.validate();
  CMatrix block = CMatrix::Zero(space.dim_x, space.dim_x);
  for (int k = 0; k < space.dim_x; ++k) {
    const double n = k;
    block(k, k) = std::polar(1.0, K * t * n * n + omega_eff * t * n);
  }
  return mode_operator(space, Mode::x, block);
}

OperatorMatrix squeeze_unitary(double epsilon, double t, const ModeSpace& space) {
  space.validate();
  const CMatrix a = annihilation_block(space.dim_x);
  const CMatrix a2 = a * a;
  const CMatrix generator = Complex(0.0, epsilon * t) * (a2.adjoint() + a2);
  const CMatrix block = generator.exp();

  const double top = block.col(0).tail(2).squaredNorm();
  if (top > kLeakageThreshold) {
    std::ostringstream os;
    os << "squeezed vacuum with epsilon*t = " << epsilon * t << " leaks " << top
       << " into the top two levels of a dimension-" << space.dim_x << " radial mode";
    throw TruncationLeakageError(os.str());
  }
  return mode_operator(space, Mode::x, block);
}

KerrStateMoments kerr_state_moments(Complex alpha, double K, double omega_eff, double t) {
  const Complex i(0.0, 1.0);
  const double n = std::norm(alpha);
  const double kt = K * t;
  const Complex rotation = std::exp(i * (K + omega_eff) * t);

  KerrStateMoments m;
  m.mean_a = rotation * alpha * std::exp(n * (std::exp(2.0 * i * kt) - 1.0));
  m.mean_a2 = rotation * rotation * alpha * alpha * std::exp(2.0 * i * kt) *
              std::exp(n * (std::exp(4.0 * i * kt) - 1.0));
  const double first = 2.0 * m.mean_a.real();
  m.qfi = 2.0 * (2.0 * m.mean_a2.real() + 2.0 * n + 1.0 - first * first);
  return m;
}

}  // namespace tkerr
