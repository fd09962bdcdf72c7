#pragma once

// Single-ion tapered-trap model. All Hamiltonians are returned as H/ħ in
// rad/s with zero-point energies dropped; all frequencies are angular.

#include <numbers>
#include <vector>

#include "tkerr/constants.hpp"
#include "tkerr/fock.hpp"
#include "tkerr/harmonic.hpp"

namespace tkerr {

struct TrapConfig {
  double omega_x = 0.0;  // rad/s
  double omega_y = 0.0;  // rad/s, only used by the ion-chain model
  double omega_z = 0.0;  // rad/s
  double l0 = 0.0;       // taper length, m; +inf means no taper (λ = 0)
  double mass = 40.0 * kAtomicMassUnit;
  double charge = kElementaryCharge;

  /// Throws std::invalid_argument on non-positive frequencies, l0 or mass.
  void validate() const;

  /// r_0k = √(ħ / 2 m ω_k).
  double ground_state_length(double omega) const;
  double r0x() const { return ground_state_length(omega_x); }
  double r0z() const { return ground_state_length(omega_z); }

  /// Nonlinear coupling λ = r_0z ω_x / (2 l0).
  double lambda() const { return r0z() * omega_x / (2.0 * l0); }
};

enum class DriveKind { classical, spin };

/// Classical axial force F_z sin(Φt)(â†_z e^{iφ} + h.c.) r_0z, or the
/// bichromatic spin-dependent force g sin(μt) σ(φ₊)(â†_z e^{iφ₋} + h.c.).
struct DriveConfig {
  DriveKind kind = DriveKind::classical;
  /// Force F_z in newtons (classical) or spin-motion coupling g in rad/s (spin).
  double amplitude = 0.0;
  /// Φ (classical) or μ (spin), rad/s.
  double frequency = 0.0;
  /// φ for the classical drive.
  double phase = std::numbers::pi / 2.0;
  double spin_phase_plus = 0.0;
  double spin_phase_minus = std::numbers::pi / 2.0;

  /// Throws std::invalid_argument for negative or non-finite amplitude or
  /// frequency and ResonancePoleError when the frequency sits on ω_z.
  void validate(const TrapConfig& trap) const;

  /// Phase of the axial quadrature the drive couples to.
  double axial_phase() const { return kind == DriveKind::classical ? phase : spin_phase_minus; }
};

/// Drive rate in rad/s: Ω = r_0z F_z / ħ for the classical drive, g for the
/// spin drive.
double drive_rate(const TrapConfig& trap, const DriveConfig& drive);

struct EffectiveCouplings {
  double K = 0.0;          // Kerr strength
  double omega_eff = 0.0;  // radial frequency shift
  double epsilon = 0.0;    // squeezing rate ΩλΦ/(Φ² − ω_z²)
  /// Complex squeezing amplitude ξ of −(ξ â†²_x + ξ* â²_x); equals epsilon at
  /// the default drive phase.
  Complex squeeze{0.0, 0.0};
  double chi_res = 0.0;  // 4λ²Φ/(Φ² − ω_z²)
  /// Scalar energy shift produced by time averaging and dropped from the
  /// effective Hamiltonian.
  double offset = 0.0;
};

/// Relative guard for |Φ² − ω_z²| < guard · Φ².
inline constexpr double kResonancePoleGuard = 1e-6;

EffectiveCouplings effective_couplings(const TrapConfig& trap, const DriveConfig& drive);

/// ω_x n̂_x + ω_z n̂_z + λ(â†_z + â_z)(â†_x + â_x)² + Ω sin(Φt)(â†_z e^{iφ} + h.c.).
/// Classical drive only.
HarmonicHamiltonian lab_frame(const TrapConfig& trap, const DriveConfig& drive,
                              const ModeSpace& space);
OperatorMatrix lab_hamiltonian(const TrapConfig& trap, const DriveConfig& drive,
                               const ModeSpace& space, double t);

/// Oscillating terms of the Hamiltonian in the interaction picture with
/// respect to ω_x n̂_x + ω_z n̂_z: the radial-axial exchange terms at
/// 2ω_x ± ω_z, the radial-number-dependent axial displacement at ω_z and the
/// drive sidebands at Φ ± ω_z. Products of truncated ladder operators are
/// used throughout so that this frame is exactly unitarily equivalent to
/// lab_frame on the truncated space.
std::vector<HarmonicTerm> interaction_terms(const TrapConfig& trap, const DriveConfig& drive,
                                            const ModeSpace& space);
HarmonicHamiltonian interaction_frame(const TrapConfig& trap, const DriveConfig& drive,
                                      const ModeSpace& space);
OperatorMatrix interaction_hamiltonian(const TrapConfig& trap, const DriveConfig& drive,
                                       const ModeSpace& space, double t);

/// −K n̂²_x − ω n̂_x − (ξ â†²_x + ξ* â²_x)[σ(φ₊)] − χ(n̂_z + 2 n̂_z n̂_x).
/// Warns when the drive is not on the two-phonon resonance Φ = 2ω_x.
OperatorMatrix effective_hamiltonian(const TrapConfig& trap, const DriveConfig& drive,
                                     const ModeSpace& space);

struct ValidityReport {
  double lambda_over_sum = 0.0;         // λ / (2ω_x + ω_z)
  double lambda_over_difference = 0.0;  // λ / |2ω_x − ω_z|
  double lambda_over_axial = 0.0;       // λ / ω_z
  double drive_over_sum = 0.0;          // (Ω/2) / |Φ + ω_z|
  double drive_over_difference = 0.0;   // (Ω/2) / |Φ − ω_z|
  double threshold = 0.1;
  bool pass = false;

  double worst() const;
};

/// Time-averaging validity ratios; passes when every ratio is ≤ threshold.
ValidityReport resonance_check(const TrapConfig& trap, const DriveConfig& drive,
                               double threshold = 0.1);

}  // namespace tkerr
