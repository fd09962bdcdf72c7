#include "tkerr/harmonic.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "tkerr/errors.hpp"

namespace tkerr {

HarmonicHamiltonian::HarmonicHamiltonian(OperatorMatrix static_part,
                                         std::vector<HarmonicTerm> terms)
    : static_part_(std::move(static_part)), terms_(std::move(terms)) {
  for (const auto& term : terms_) {
    if (!(term.op.space() == static_part_.space())) {
      throw SpaceMismatchError("harmonic term lives on a different space than the static part");
    }
  }
}

OperatorMatrix HarmonicHamiltonian::at(double t) const {
  CMatrix h = static_part_.matrix();
  for (const auto& term : terms_) {
    const Complex phase = std::polar(1.0, term.freq * t);
    h += phase * term.op.matrix() + std::conj(phase) * term.op.matrix().adjoint();
  }
  return {space(), std::move(h)};
}

std::optional<double> HarmonicHamiltonian::period(int max_denominator) const {
  double base = 0.0;
  for (const auto& term : terms_) {
    const double f = std::abs(term.freq);
    if (f > 0.0 && (base == 0.0 || f < base)) base = f;
  }
  if (base == 0.0) return std::nullopt;

  long long denominator = 1;
  for (const auto& term : terms_) {
    const double ratio = std::abs(term.freq) / base;
    if (ratio == 0.0) continue;
    bool found = false;
    for (int q = 1; q <= max_denominator; ++q) {
      const double x = ratio * q;
      if (std::abs(x - std::round(x)) <= 1e-9 * x) {
        denominator = std::lcm(denominator, static_cast<long long>(q));
        found = true;
        break;
      }
    }
    if (!found || denominator > max_denominator) return std::nullopt;
  }
  return 2.0 * std::numbers::pi * static_cast<double>(denominator) / base;
}

}  // namespace tkerr
