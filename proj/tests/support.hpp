#pragma once

#include <complex>
#include <random>
#include <string>
#include <vector>

#include "tkerr/constants.hpp"
#include "tkerr/diagnostics.hpp"
#include "tkerr/fock.hpp"
#include "tkerr/model.hpp"

namespace tkerr::testing {

// Radial-squeezing operating point: l0 = 0.05 mm,
// ω_x/2π = 1.2 MHz, Φ/2π = 2.4 MHz, F_z = 700 yN, m = 40 u.
inline TrapConfig fig2_trap(double axial_hz = 100e3) {
  TrapConfig t;
  t.omega_x = angular(1.2e6);
  t.omega_y = angular(1.2e6);
  t.omega_z = angular(axial_hz);
  t.l0 = 0.05e-3;
  return t;
}

inline DriveConfig fig2_drive(double force_yn = 700.0) {
  DriveConfig d;
  d.amplitude = force_yn * 1e-24;
  d.frequency = angular(2.4e6);
  return d;
}

inline double relative_frobenius(const CMatrix& a, const CMatrix& b) {
  return (a - b).norm() / b.norm();
}

inline CMatrix random_matrix(std::mt19937& rng, Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  }
  return m;
}

inline CMatrix random_hermitian(std::mt19937& rng, Eigen::Index n) {
  const CMatrix m = random_matrix(rng, n);
  return 0.5 * (m + m.adjoint());
}

// Routes library warnings into a vector for the lifetime of the object.
class CapturedWarnings {
 public:
  CapturedWarnings() {
    previous_ = set_warning_handler([this](const std::string& m) { messages.push_back(m); });
  }
  ~CapturedWarnings() { set_warning_handler(previous_); }
  CapturedWarnings(const CapturedWarnings&) = delete;
  CapturedWarnings& operator=(const CapturedWarnings&) = delete;

  std::vector<std::string> messages;

 private:
  WarningHandler previous_;
};

}  // namespace tkerr::testing
