#include "tkerr/chain.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "tkerr/constants.hpp"
#include "tkerr/errors.hpp"

namespace tkerr {
namespace {

constexpr double kResidualTarget = 1e-12;
constexpr int kMaxNewtonIterations = 200;

Eigen::VectorXd force_balance(const Eigen::VectorXd& u) {
  const auto n = u.size();
  Eigen::VectorXd f = u;
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == m) continue;
      const double d = u(m) - u(k);
      f(m) += (k < m ? -1.0 : 1.0) / (d * d);
    }
  }
  return f;
}

Eigen::MatrixXd axial_matrix(const Eigen::VectorXd& u) {
  const auto n = u.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double c = 2.0 / std::pow(std::abs(u(i) - u(j)), 3);
      a(i, i) += c;
      a(i, j) = -c;
    }
  }
  return a;
}

void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index top = 0;
    for (Eigen::Index r = 1; r < vectors.rows(); ++r) {
      if (std::abs(vectors(r, c)) > std::abs(vectors(top, c)) + 1e-12) top = r;
    }
    if (vectors(top, c) < 0.0) vectors.col(c) *= -1.0;
  }
}

AxisModes diagonalize(const Eigen::MatrixXd& a, char axis, bool descending) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError(std::string("eigen-decomposition failed on axis ") + axis);
  }
  const auto n = a.rows();
  AxisModes modes;
  modes.gamma = solver.eigenvalues();
  modes.vectors = solver.eigenvectors();
  if (descending) {
    modes.gamma = modes.gamma.reverse().eval();
    modes.vectors = modes.vectors.rowwise().reverse().eval();
  }
  for (Eigen::Index p = 0; p < n; ++p) {
    if (!(modes.gamma(p) > 0.0)) {
      std::ostringstream os;
      os << "unstable " << axis << " mode " << p << ": gamma = " << modes.gamma(p);
      throw InstabilityError(os.str(), axis, static_cast<int>(p));
    }
  }
  modes.freqs = modes.gamma.cwiseSqrt();
  fix_signs(modes.vectors);
  return modes;
}

}  // namespace

void ChainSpec::validate() const {
  std::ostringstream os;
  if (n_ions < 2) os << "n_ions must be at least 2; ";
  if (!(beta_x > 0.0 && beta_x < 1.0)) os << "beta_x must lie in (0, 1); ";
  if (!(beta_y > 0.0 && beta_y < 1.0)) os << "beta_y must lie in (0, 1); ";
  if (!(std::isfinite(length_scale_l) && length_scale_l > 0.0)) {
    os << "length_scale_l must be positive; ";
  }
  if (std::isnan(l0) || l0 <= 0.0) os << "l0 must be positive; ";
  if (!os.str().empty()) throw std::invalid_argument("invalid chain: " + os.str());
}

double equilibrium_residual(const Eigen::VectorXd& u) {
  return force_balance(u).cwiseAbs().maxCoeff();
}

Eigen::VectorXd solve_equilibria(int n_ions) {
  if (n_ions < 2) throw std::invalid_argument("solve_equilibria needs at least two ions");
  const Eigen::Index n = n_ions;

  // Uniform guess with roughly the right central spacing.
  const double spacing = 2.0 * std::pow(static_cast<double>(n), -0.56);
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = (static_cast<double>(i) - 0.5 * (n - 1)) * spacing;

  Eigen::VectorXd f = force_balance(u);
  double residual = f.cwiseAbs().maxCoeff();
  for (int iter = 0; iter < kMaxNewtonIterations && residual >= kResidualTarget; ++iter) {
    const Eigen::VectorXd step = axial_matrix(u).ldlt().solve(-f);
    // Halve the step until the ordering survives and the residual drops.
    double damping = 1.0;
    for (int k = 0; k < 60; ++k, damping *= 0.5) {
      const Eigen::VectorXd trial = u + damping * step;
      bool ordered = true;
      for (Eigen::Index i = 1; i < n; ++i) ordered = ordered && trial(i) > trial(i - 1);
      if (!ordered) continue;
      const Eigen::VectorXd trial_f = force_balance(trial);
      const double trial_residual = trial_f.cwiseAbs().maxCoeff();
      if (trial_residual < residual || k == 59) {
        u = trial;
        f = trial_f;
        residual = trial_residual;
        break;
      }
    }
  }
  if (!(residual < kResidualTarget)) {
    std::ostringstream os;
    os << "equilibrium solver for " << n_ions << " ions stalled at residual " << residual;
    throw ConvergenceError(os.str());
  }
  return u;
}

ChainMatrices build_matrices(const ChainSpec& spec, const Eigen::VectorXd& u) {
  spec.validate();
  const auto n = u.size();
  if (n != spec.n_ions) throw std::invalid_argument("build_matrices: position count != n_ions");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(u(i))) throw SingularConfigurationError("non-finite ion position");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (u(i) == u(j)) {
        std::ostringstream os;
        os << "ions " << i << " and " << j << " coincide at u = " << u(i);
        throw SingularConfigurationError(os.str());
      }
    }
  }

  ChainMatrices m;
  m.z = axial_matrix(u);

  auto radial = [&](double beta) {
    const double b2 = beta * beta;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      a(i, i) = 1.0 + 2.0 * spec.length_scale_l * u(i) / spec.l0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double c = b2 / std::pow(std::abs(u(i) - u(j)), 3);
        a(i, i) -= c;
        a(i, j) = c;
      }
    }
    return a;
  };
  m.x = radial(spec.beta_x);
  m.y = radial(spec.beta_y);
  return m;
}

ChainSpectrum mode_spectrum(const ChainSpec& spec) {
  spec.validate();
  ChainSpectrum s;
  s.equilibria_u = solve_equilibria(spec.n_ions);
  s.matrices = build_matrices(spec, s.equilibria_u);
  s.z = diagonalize(s.matrices.z, 'z', false);
  s.x = diagonalize(s.matrices.x, 'x', true);
  s.y = diagonalize(s.matrices.y, 'y', true);
  s.gap = s.x.freqs(0) - s.x.freqs(1);
  const double uniform = 1.0 / std::sqrt(static_cast<double>(spec.n_ions));
  s.com_overlap = std::abs(s.x.vectors.col(0).sum() * uniform);
  return s;
}

double linear_trap_gap(double beta) { return 1.0 - std::sqrt(1.0 - beta * beta); }

std::vector<GapPoint> gap_sweep(const ChainSpec& base, GapAxis axis,
                                const std::vector<double>& values) {
  std::vector<GapPoint> out;
  out.reserve(values.size());
  for (double v : values) {
    ChainSpec spec = base;
    if (axis == GapAxis::l0) {
      spec.l0 = v;
    } else {
      spec.beta_x = v;
    }
    const auto s = mode_spectrum(spec);
    out.push_back({v, s.gap, s.com_overlap});
  }
  return out;
}

double coulomb_length(double mass, double charge, double omega_z) {
  if (!(mass > 0.0) || !(omega_z > 0.0)) {
    throw std::invalid_argument("coulomb_length needs positive mass and frequency");
  }
  return std::cbrt(charge * charge /
                   (4.0 * std::numbers::pi * kVacuumPermittivity * mass * omega_z * omega_z));
}

}  // namespace tkerr
