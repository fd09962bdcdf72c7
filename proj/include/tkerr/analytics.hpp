#pragma once

// Closed-form results and second-order time averaging.

#include <vector>

#include "tkerr/fock.hpp"
#include "tkerr/harmonic.hpp"
#include "tkerr/model.hpp"

namespace tkerr {

/// Second-order time average of Σ_n (ĥ_n e^{iω_n t} + h.c.):
///
///   Ĥ_eff = Σ_{m,n: ω_m = ω_n} (1/ω̄_mn) [ĥ_m, ĥ†_n],   1/ω̄_mn = ½(1/ω_m + 1/ω_n).
///
/// Only secular pairs (|ω_m − ω_n| < 1e-9 · max|ω|) are kept; oscillating
/// cross terms are dropped. The result includes scalar energy shifts.
/// Throws IllDefinedAverageError if any frequency is zero and
/// SpaceMismatchError if the terms live on different spaces.
OperatorMatrix time_average(const std::vector<HarmonicTerm>& terms);

/// time_average of the interaction-picture terms, evaluated on a space
/// padded by two radial and one axial Fock level and restricted back to
/// `space`, so that no truncation artifacts enter the commutators.
/// Includes EffectiveCouplings::offset on the diagonal.
OperatorMatrix averaged_hamiltonian(const TrapConfig& trap, const DriveConfig& drive,
                                    const ModeSpace& space);

/// Û_K = e^{iKt n̂²_x} e^{iωt n̂_x}.
OperatorMatrix kerr_unitary(double K, double omega_eff, double t, const ModeSpace& space);

/// Ŝ = e^{iεt(â†²_x + â²_x)} by scaling and squaring. Throws
/// TruncationLeakageError when Ŝ|0⟩ leaks into the top two radial levels.
OperatorMatrix squeeze_unitary(double epsilon, double t, const ModeSpace& space);

struct KerrStateMoments {
  Complex mean_a;
  Complex mean_a2;
  double qfi = 0.0;
};

/// ⟨â⟩, ⟨â²⟩ and the displacement QFI (θ = 0) of Û_K(t)|α⟩, truncation free.
KerrStateMoments kerr_state_moments(Complex alpha, double K, double omega_eff, double t);

}  // namespace tkerr
