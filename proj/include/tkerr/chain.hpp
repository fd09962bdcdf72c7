#pragma once

// Linear ion string in the tapered trap: equilibrium positions, harmonic
// coupling matrices and normal modes.
//
// Positions are dimensionless, u = z / l, with l the Coulomb length scale.
// Mode frequencies are reported in units of the respective trap frequency,
// ω_{k,p} / ω_k = √γ_{k,p}.

#include <vector>

#include <Eigen/Dense>

namespace tkerr {

struct ChainSpec {
  int n_ions = 2;
  double beta_x = 0.1;          // ω_z / ω_x
  double beta_y = 0.1;          // ω_z / ω_y
  double length_scale_l = 0.0;  // m
  double l0 = 0.0;              // m, +inf switches the taper off

  /// Throws std::invalid_argument unless n_ions ≥ 2, 0 < β < 1, l > 0, l0 > 0.
  void validate() const;
};

/// Solves u_m − Σ_{n<m} (u_m − u_n)⁻² + Σ_{n>m} (u_m − u_n)⁻² = 0 by damped
/// Newton iteration from a uniform guess. Positions come back ascending with
/// max residual below 1e-12; ConvergenceError after 200 iterations.
Eigen::VectorXd solve_equilibria(int n_ions);

/// Largest absolute force-balance residual at u.
double equilibrium_residual(const Eigen::VectorXd& u);

struct ChainMatrices {
  Eigen::MatrixXd z;
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
};

/// Axial and radial coupling matrices. The taper adds 2 l u_i / l0 to the
/// radial diagonal. Throws SingularConfigurationError for coincident or
/// non-finite positions.
ChainMatrices build_matrices(const ChainSpec& spec, const Eigen::VectorXd& u);

struct AxisModes {
  Eigen::VectorXd gamma;    // eigenvalues γ
  Eigen::VectorXd freqs;    // √γ
  Eigen::MatrixXd vectors;  // columns; the first largest-magnitude component is positive
};

struct ChainSpectrum {
  Eigen::VectorXd equilibria_u;
  ChainMatrices matrices;
  AxisModes z;  // ascending; the COM mode γ = 1 comes first
  AxisModes x;  // descending
  AxisModes y;  // descending
  /// (highest − second highest radial x frequency) in units of ω_x.
  double gap = 0.0;
  /// |⟨b_top, 1/√N⟩| of the highest radial x mode; 1 for a pure COM mode.
  double com_overlap = 0.0;
};

/// Full spectrum. Throws InstabilityError (axis, mode index) for γ ≤ 0.
ChainSpectrum mode_spectrum(const ChainSpec& spec);

/// 1 − √(1 − β²): the top radial gap without taper, for any N (the second
/// mode is the tilt mode with γ = 1 − β²).
double linear_trap_gap(double beta);

enum class GapAxis { l0, beta_x };

struct GapPoint {
  double parameter = 0.0;
  double gap = 0.0;
  double com_overlap = 0.0;
};

/// mode_spectrum over a grid of l0 (m) or β_x values.
std::vector<GapPoint> gap_sweep(const ChainSpec& base, GapAxis axis,
                                const std::vector<double>& values);

/// Coulomb length from l³ = e²/(4πε₀ m ω_z²). Other conventions in use
/// differ by a factor 2 inside the cube root; reproductions that quote l
/// should pass it to ChainSpec directly.
double coulomb_length(double mass, double charge, double omega_z);

}  // namespace tkerr
