#pragma once

#include <numbers>

namespace tkerr {

// CODATA 2018.
inline constexpr double kHbar = 1.054571817e-34;             // J s
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// ω = 2π f.
constexpr double angular(double hertz) { return kTwoPi * hertz; }

}  // namespace tkerr
