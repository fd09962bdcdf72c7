#pragma once

#include <optional>
#include <vector>

#include "tkerr/fock.hpp"

namespace tkerr {

/// One oscillating component ĥ e^{iωt} + ĥ† e^{-iωt} of a Hamiltonian
/// (stored as H/ħ, ω in rad/s).
struct HarmonicTerm {
  OperatorMatrix op;
  double freq;
};

/// H(t)/ħ = Ĥ_static + Σ_n (ĥ_n e^{iω_n t} + h.c.).
///
/// Every frame the library works in (lab, interaction picture, effective)
/// has this shape, so one representation serves Hamiltonian evaluation,
/// time averaging and propagation.
class HarmonicHamiltonian {
 public:
  explicit HarmonicHamiltonian(OperatorMatrix static_part,
                               std::vector<HarmonicTerm> terms = {});

  const ModeSpace& space() const { return static_part_.space(); }
  const OperatorMatrix& static_part() const { return static_part_; }
  const std::vector<HarmonicTerm>& terms() const { return terms_; }
  bool is_static() const { return terms_.empty(); }

  OperatorMatrix at(double t) const;

  /// Smallest T > 0 with H(t + T) = H(t) when all nonzero term frequencies
  /// are rational multiples of the smallest one with denominators up to
  /// `max_denominator` (relative tolerance 1e-9). Empty for static or
  /// incommensurate Hamiltonians.
  std::optional<double> period(int max_denominator = 1000) const;

 private:
  OperatorMatrix static_part_;
  std::vector<HarmonicTerm> terms_;
};

}  // namespace tkerr
