#include "tkerr/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tkerr/diagnostics.hpp"
#include "tkerr/errors.hpp"

namespace tkerr {
namespace {

const Complex kI(0.0, 1.0);

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

// σ(φ₊) = σ₊e^{iφ₊} + σ₋e^{−iφ₊} for the spin drive, identity otherwise.
OperatorMatrix drive_spin_factor(const DriveConfig& drive, const ModeSpace& space) {
  if (drive.kind == DriveKind::classical) return identity(space);
  if (!space.spin) {
    throw InvalidSpaceError("spin-dependent drive needs a mode space with a spin factor");
  }
  return std::cos(drive.spin_phase_plus) * pauli(space, PauliAxis::x) -
         std::sin(drive.spin_phase_plus) * pauli(space, PauliAxis::y);
}

// D = −i (A/2) e^{iφ}: amplitude of â†_z at e^{i(Φ+ω_z)t} in the
// interaction picture.
Complex sideband_amplitude(const TrapConfig& trap, const DriveConfig& drive) {
  return -kI * (0.5 * drive_rate(trap, drive)) * std::polar(1.0, drive.axial_phase());
}

void require_classical(const DriveConfig& drive, const char* where) {
  if (drive.kind != DriveKind::classical) {
    throw WrongDriveKindError(std::string(where) + " is defined for the classical axial drive only");
  }
}

}  // namespace

void TrapConfig::validate() const {
  std::ostringstream os;
  if (!positive_finite(omega_x)) os << "omega_x must be positive; ";
  if (!positive_finite(omega_y)) os << "omega_y must be positive; ";
  if (!positive_finite(omega_z)) os << "omega_z must be positive; ";
  if (std::isnan(l0) || l0 <= 0.0) os << "l0 must be positive (infinity switches the taper off); ";
  if (!positive_finite(mass)) os << "mass must be positive; ";
  if (!std::isfinite(charge)) os << "charge must be finite; ";
  if (!os.str().empty()) throw std::invalid_argument("invalid trap: " + os.str());
}

double TrapConfig::ground_state_length(double omega) const {
  return std::sqrt(kHbar / (2.0 * mass * omega));
}

void DriveConfig::validate(const TrapConfig& trap) const {
  if (!std::isfinite(amplitude) || amplitude < 0.0) {
    throw std::invalid_argument("drive amplitude must be finite and non-negative");
  }
  if (!std::isfinite(frequency) || frequency < 0.0) {
    throw std::invalid_argument("drive frequency must be finite and non-negative");
  }
  if (!std::isfinite(phase) || !std::isfinite(spin_phase_plus) ||
      !std::isfinite(spin_phase_minus)) {
    throw std::invalid_argument("drive phases must be finite");
  }
  const double f2 = frequency * frequency;
  if (std::abs(f2 - trap.omega_z * trap.omega_z) < kResonancePoleGuard * f2) {
    std::ostringstream os;
    os << "drive frequency " << frequency << " rad/s sits on the axial resonance omega_z = "
       << trap.omega_z << " rad/s";
    throw ResonancePoleError(os.str());
  }
}

double drive_rate(const TrapConfig& trap, const DriveConfig& drive) {
  if (drive.kind == DriveKind::classical) return trap.r0z() * drive.amplitude / kHbar;
  return drive.amplitude;
}

EffectiveCouplings effective_couplings(const TrapConfig& trap, const DriveConfig& drive) {
  trap.validate();
  drive.validate(trap);

  const double lam = trap.lambda();
  const double wz = trap.omega_z;
  const double f = drive.frequency;
  const double denom = f * f - wz * wz;
  const double rate = drive_rate(trap, drive);
  const Complex d = sideband_amplitude(trap, drive);

  EffectiveCouplings c;
  c.K = lam * lam * (4.0 / wz - 2.0 * wz / denom);
  c.omega_eff = lam * lam * ((4.0 * f - 2.0 * wz) / denom + 4.0 / wz);
  c.epsilon = rate * lam * f / denom;
  c.squeeze = lam * (std::conj(d) / (f + wz) + d / (f - wz));
  c.chi_res = 4.0 * lam * lam * f / denom;
  c.offset = -lam * lam / wz - 2.0 * lam * lam / (f + wz) + 0.5 * rate * rate * wz / denom;
  return c;
}

HarmonicHamiltonian lab_frame(const TrapConfig& trap, const DriveConfig& drive,
                              const ModeSpace& space) {
  require_classical(drive, "lab_frame");
  trap.validate();
  drive.validate(trap);
  space.validate();

  const auto ax = ladder(space, Mode::x);
  const auto az = ladder(space, Mode::z);
  const auto qx = ax + ax.adjoint();
  const auto qz = az + az.adjoint();

  auto h0 = trap.omega_x * number(space, Mode::x) + trap.omega_z * number(space, Mode::z) +
            trap.lambda() * (qz * qx * qx);

  std::vector<HarmonicTerm> terms;
  const double rate = drive_rate(trap, drive);
  if (rate != 0.0) {
    // Ω sin(Φt) X = (Ω/2i) e^{iΦt} X + h.c. for Hermitian X.
    const Complex e = std::polar(1.0, drive.phase);
    auto quadrature = e * az.adjoint() + std::conj(e) * az;
    terms.push_back({(rate / (2.0 * kI)) * quadrature, drive.frequency});
  }
  return HarmonicHamiltonian(std::move(h0), std::move(terms));
}

OperatorMatrix lab_hamiltonian(const TrapConfig& trap, const DriveConfig& drive,
                               const ModeSpace& space, double t) {
  return lab_frame(trap, drive, space).at(t);
}

std::vector<HarmonicTerm> interaction_terms(const TrapConfig& trap, const DriveConfig& drive,
                                            const ModeSpace& space) {
  trap.validate();
  drive.validate(trap);
  space.validate();

  const double lam = trap.lambda();
  const double wx = trap.omega_x;
  const double wz = trap.omega_z;

  const auto ax = ladder(space, Mode::x);
  const auto az = ladder(space, Mode::z);
  const auto axd = ax.adjoint();
  const auto azd = az.adjoint();
  const auto axd2 = axd * axd;

  std::vector<HarmonicTerm> terms;
  if (lam != 0.0) {
    terms.push_back({lam * ((axd * ax + ax * axd) * azd), wz});
    terms.push_back({lam * (axd2 * azd), 2.0 * wx + wz});
    terms.push_back({lam * (axd2 * az), 2.0 * wx - wz});
  }

  if (drive_rate(trap, drive) != 0.0) {
    const auto spin = drive_spin_factor(drive, space);
    const Complex d = sideband_amplitude(trap, drive);
    terms.push_back({d * (azd * spin), drive.frequency + wz});
    terms.push_back({-std::conj(d) * (az * spin), drive.frequency - wz});
  } else if (drive.kind == DriveKind::spin && !space.spin) {
    drive_spin_factor(drive, space);  // throws
  }
  return terms;
}

HarmonicHamiltonian interaction_frame(const TrapConfig& trap, const DriveConfig& drive,
                                      const ModeSpace& space) {
  auto terms = interaction_terms(trap, drive, space);
  return HarmonicHamiltonian({space, CMatrix::Zero(space.total_dim(), space.total_dim())},
                             std::move(terms));
}

OperatorMatrix interaction_hamiltonian(const TrapConfig& trap, const DriveConfig& drive,
                                       const ModeSpace& space, double t) {
  return interaction_frame(trap, drive, space).at(t);
}

OperatorMatrix effective_hamiltonian(const TrapConfig& trap, const DriveConfig& drive,
                                     const ModeSpace& space) {
  const auto c = effective_couplings(trap, drive);
  space.validate();
  const double resonance = 2.0 * trap.omega_x;
  if (std::abs(drive.frequency - resonance) > 1e-9 * resonance) {
    std::ostringstream os;
    os << "effective Hamiltonian evaluated off the two-phonon resonance (drive "
       << drive.frequency << " rad/s, 2*omega_x = " << resonance << " rad/s)";
    warn(os.str());
  }

  const auto nx = number(space, Mode::x);
  const auto nz = number(space, Mode::z);
  const auto ax = ladder(space, Mode::x);
  const auto ax2 = ax * ax;
  const auto spin = drive_spin_factor(drive, space);

  auto h = (-c.K) * (nx * nx) - c.omega_eff * nx -
           ((c.squeeze * ax2.adjoint() + std::conj(c.squeeze) * ax2) * spin) -
           c.chi_res * (nz + 2.0 * (nz * nx));
  return h;
}

double ValidityReport::worst() const {
  return std::max({lambda_over_sum, lambda_over_difference, lambda_over_axial, drive_over_sum,
                   drive_over_difference});
}

ValidityReport resonance_check(const TrapConfig& trap, const DriveConfig& drive,
                               double threshold) {
  const double lam = trap.lambda();
  const double half_rate = 0.5 * drive_rate(trap, drive);
  const double wx = trap.omega_x;
  const double wz = trap.omega_z;
  const double f = drive.frequency;

  ValidityReport r;
  r.lambda_over_sum = lam / (2.0 * wx + wz);
  r.lambda_over_difference = lam / std::abs(2.0 * wx - wz);
  r.lambda_over_axial = lam / wz;
  r.drive_over_sum = half_rate / std::abs(f + wz);
  r.drive_over_difference = half_rate / std::abs(f - wz);
  r.threshold = threshold;
  r.pass = r.worst() <= threshold;
  return r;
}

}  // namespace tkerr
