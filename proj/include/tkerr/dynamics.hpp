#pragma once

// Schrödinger propagation of a truncated state under a HarmonicHamiltonian,
// with observable recording on a uniform output grid.

#include <optional>
#include <string>
#include <vector>

#include "tkerr/fock.hpp"
#include "tkerr/harmonic.hpp"
#include "tkerr/model.hpp"

namespace tkerr {

enum class Frame { lab, interaction, effective };

/// Builds the Hamiltonian of the requested frame. `effective` wraps the
/// static effective Hamiltonian.
HarmonicHamiltonian build_frame(Frame frame, const TrapConfig& trap, const DriveConfig& drive,
                                const ModeSpace& space);

enum class PropagationMethod {
  /// Stroboscopic when it pays off (see propagate), direct otherwise.
  automatic,
  /// Adaptive Runge-Kutta on the state vector, landing on every output time.
  direct,
  /// One-period propagator from the matrix equation, then applied
  /// repeatedly. Needs a periodic Hamiltonian whose period divides the
  /// output spacing.
  stroboscopic,
};

struct PropagationSpec {
  double t_final = 0.0;  // s
  int n_outputs = 2;     // grid t_k = k t_final / (n_outputs − 1)
  /// Frame of the exact trajectory in record_fig2; propagate() itself takes
  /// whatever Hamiltonian it is given.
  Frame frame = Frame::interaction;
  double step_tolerance = 1e-9;  // relative local error per step
  double norm_drift_limit = 1e-6;
  bool store_states = false;
  double qfi_theta = 0.0;  // phase of the displacement generator
  PropagationMethod method = PropagationMethod::automatic;

  /// Throws std::invalid_argument unless t_final > 0, n_outputs ≥ 2 and both
  /// tolerances lie in (0, 1e-2).
  void validate() const;

  std::vector<double> output_times() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<QuantumState> states;  // filled only with store_states
  std::vector<double> mean_nx;
  std::vector<double> mean_nz;
  std::vector<double> qfi;
  std::vector<double> norm;
  std::vector<double> top_level_population;  // largest over both modes
  std::vector<std::string> warnings;

  long steps = 0;     // accepted integrator steps
  long rejected = 0;  // rejected integrator steps
  bool stroboscopic = false;
  double period = 0.0;      // s, when stroboscopic
  long reduced_dim = 0;     // dimension of the subspace actually propagated
};

/// Solves i d|ψ⟩/dt = H(t)|ψ⟩ from t = 0 and records observables at the
/// output grid. The norm is monitored, never corrected.
///
/// Only the subspace reachable from the support of ψ₀ through the
/// Hamiltonian's nonzero pattern is propagated; amplitudes outside it stay
/// exactly zero.
///
/// `automatic` chooses the stroboscopic method when H is periodic, the
/// output spacing is an integer multiple of the period and the run spans at
/// least half as many periods as the propagated dimension.
///
/// Throws IntegrationError when |‖ψ‖ − 1| exceeds the drift limit or the
/// integrator fails, std::invalid_argument when a forced stroboscopic run is
/// not possible. Truncation leakage above kLeakageThreshold produces one
/// warning per run.
Trajectory propagate(const HarmonicHamiltonian& hamiltonian, const QuantumState& psi0,
                     const PropagationSpec& spec);

/// 4(⟨Ĝ²⟩ − ⟨Ĝ⟩²) with Ĝ = (â†_x e^{iθ} + â_x e^{−iθ})/√2.
double qfi_displacement(const QuantumState& state, double theta);

/// ⟨n̂⟩ of one mode.
double mean_number(const CVector& amplitudes, const ModeSpace& space, Mode mode);

struct Fig2Result {
  Trajectory exact;
  Trajectory effective;
};

/// Exact (spec.frame) and effective propagation from |0, 0⟩ on a shared grid.
Fig2Result record_fig2(const TrapConfig& trap, const DriveConfig& drive, const ModeSpace& space,
                       const PropagationSpec& spec);

}  // namespace tkerr
