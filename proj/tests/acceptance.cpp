// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tkerr/analytics.hpp"
#include "tkerr/chain.hpp"
#include "tkerr/diagnostics.hpp"
#include "tkerr/dynamics.hpp"
#include "tkerr/model.hpp"

using namespace tkerr;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

TrapConfig squeezing_trap(double axial_hz) {
  TrapConfig t;
  t.omega_x = angular(1.2e6);
  t.omega_y = angular(1.2e6);
  t.omega_z = angular(axial_hz);
  t.l0 = 0.05e-3;
  return t;
}

DriveConfig squeezing_drive(double force_yn = 700.0) {
  DriveConfig d;
  d.amplitude = force_yn * 1e-24;
  d.frequency = angular(2.4e6);
  return d;
}

double relative_frobenius(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / b.norm(); }

void couplings_limit(Verdict& v) {
  auto t = squeezing_trap(50e3);
  double worst_k = 0.0;
  double worst_w = 0.0;
  for (double ratio : {20.0, 30.0, 50.0, 100.0}) {
    t.omega_x = ratio * t.omega_z;
    auto d = squeezing_drive();
    d.frequency = 2.0 * t.omega_x;
    const auto c = effective_couplings(t, d);
    const double lam = t.lambda();
    worst_k = std::max(worst_k, std::abs(c.K / (4.0 * lam * lam / t.omega_z) - 1.0));
    worst_w = std::max(worst_w, std::abs(c.K / c.omega_eff - 1.0));
  }
  v.detail << "max |K/(4 lambda^2/omega_z) - 1| = " << worst_k << ", max |K/omega - 1| = " << worst_w;
  v.require(worst_k < 0.05, "Kerr limit");
  v.require(worst_w < 0.1, "K ~ omega");
}

void averaging_equivalence(Verdict& v) {
  const ModeSpace s{20, 8, false};
  double worst = 0.0;
  for (double axial_hz : {60e3, 100e3, 140e3}) {
    const auto t = squeezing_trap(axial_hz);
    const auto d = squeezing_drive();
    const auto closed = effective_hamiltonian(t, d, s) + effective_couplings(t, d).offset * identity(s);
    worst = std::max(worst, relative_frobenius(averaged_hamiltonian(t, d, s).matrix(), closed.matrix()));
  }
  const ModeSpace ss{20, 8, true};
  DriveConfig spin;
  spin.kind = DriveKind::spin;
  spin.amplitude = angular(8e3);
  spin.frequency = angular(2.4e6);
  spin.spin_phase_plus = 0.4;
  const auto t = squeezing_trap(100e3);
  const auto closed =
      effective_hamiltonian(t, spin, ss) + effective_couplings(t, spin).offset * identity(ss);
  const double spin_dev = relative_frobenius(averaged_hamiltonian(t, spin, ss).matrix(), closed.matrix());
  v.detail << "classical max rel. Frobenius = " << worst << ", spin = " << spin_dev;
  v.require(worst < 1e-10, "classical drive");
  v.require(spin_dev < 1e-10, "spin drive");
}

void exact_vs_effective(Verdict& v) {
  const ModeSpace s{40, 12, false};
  PropagationSpec spec;
  spec.t_final = 30e-3;
  spec.n_outputs = 301;
  std::vector<double> growth;
  for (double axial_hz : {60e3, 100e3, 140e3}) {
    const auto r = record_fig2(squeezing_trap(axial_hz), squeezing_drive(), s, spec);
    double running_max = 0.0;
    double worst_excess = -std::numeric_limits<double>::infinity();
    double worst_diff = 0.0;
    double drift = 0.0;
    double leak = 0.0;
    for (std::size_t k = 0; k < r.exact.times.size(); ++k) {
      running_max = std::max({running_max, r.exact.mean_nx[k], r.effective.mean_nx[k]});
      const double diff = std::abs(r.exact.mean_nx[k] - r.effective.mean_nx[k]);
      worst_diff = std::max(worst_diff, diff);
      worst_excess = std::max(worst_excess, diff - std::max(0.15, 0.1 * running_max));
      drift = std::max({drift, std::abs(r.exact.norm[k] - 1.0), std::abs(r.effective.norm[k] - 1.0)});
      leak = std::max(leak, r.exact.top_level_population[k]);
    }
    // Early growth: <n_x>(t) / t^2 at t = 1 ms (output 10).
    const double t1 = r.exact.times[10];
    growth.push_back(r.exact.mean_nx[10] / (t1 * t1));
    v.detail << "omega_z/2pi = " << axial_hz / 1e3 << " kHz: max|diff| = " << worst_diff
             << ", peak <n_x> = " << running_max << ", growth = " << growth.back()
             << " 1/s^2, norm drift = " << drift << ", leakage = " << leak << "; ";
    v.require(worst_excess <= 0.0, "pointwise tolerance");
    v.require(drift < 1e-6, "norm");
  }
  v.require(growth[0] > growth[1] && growth[1] > growth[2], "growth rate decreasing in omega_z");
}

void kerr_qfi(Verdict& v) {
  const ModeSpace s{40, 2, false};
  const auto t = squeezing_trap(100e3);
  const auto d = squeezing_drive(0.0);
  const auto k = effective_couplings(t, d);
  const auto h = build_frame(Frame::effective, t, d, s);
  PropagationSpec spec;
  spec.t_final = 80e-3;
  spec.n_outputs = 401;
  spec.step_tolerance = 1e-11;
  std::vector<double> peaks;
  for (double alpha : {1.0, 1.5, 2.0}) {
    const auto traj = propagate(h, coherent_state(s, Mode::x, alpha), spec);
    double worst = 0.0;
    double peak = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      const double closed = kerr_state_moments(alpha, k.K, k.omega_eff, traj.times[i]).qfi;
      worst = std::max(worst, std::abs(traj.qfi[i] - closed) / closed);
      peak = std::max(peak, closed);
    }
    peaks.push_back(peak);
    const double q0 = kerr_state_moments(alpha, k.K, k.omega_eff, 0.0).qfi;
    v.detail << "alpha = " << alpha << ": max rel. dev = " << worst << ", max QFI = " << peak << "; ";
    v.require(worst < 1e-4, "numeric vs closed form");
    v.require(q0 == 2.0, "QFI(0) = 2");
    v.require(std::abs(traj.qfi.front() - 2.0) < 1e-9, "numeric QFI(0) = 2");
    v.require(peak > 2.0, "QFI exceeds 2");
  }
  v.require(peaks[0] < peaks[1] && peaks[1] < peaks[2], "maxima grow with alpha");
}

void chain_gap(Verdict& v) {
  ChainSpec c;
  c.n_ions = 10;
  c.beta_x = 0.1;
  c.beta_y = 0.1;
  c.length_scale_l = 10e-6;
  c.l0 = std::numeric_limits<double>::infinity();
  const double flat = mode_spectrum(c).gap;
  c.l0 = 1e-3;
  const double tapered = mode_spectrum(c).gap;
  const double expected = 1.0 - std::sqrt(0.99);
  v.detail << "gap(l0 = inf) = " << flat << " (closed form " << expected << "), gap(l0 = 1 mm) = "
           << tapered << ", ratio = " << tapered / flat;
  v.require(std::abs(flat - expected) < 1e-12, "untapered gap");
  v.require(std::abs(tapered / 2e-2 - 1.0) <= 0.25, "tapered gap");
}

void invariants(Verdict& v) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> when(0.0, 1e-4);

  // Hermiticity.
  double herm = 0.0;
  {
    const ModeSpace s{10, 5, false};
    const auto t = squeezing_trap(100e3);
    const auto d = squeezing_drive();
    for (int k = 0; k < 5; ++k) {
      const double at = when(rng);
      herm = std::max({herm, lab_hamiltonian(t, d, s, at).hermiticity_defect(),
                       interaction_hamiltonian(t, d, s, at).hermiticity_defect()});
    }
    herm = std::max(herm, effective_hamiltonian(t, d, s).hermiticity_defect());
  }
  v.detail << "hermiticity defect = " << herm;
  v.require(herm < 1e-12, "hermiticity");

  // Norm conservation and frame invariance.
  {
    const ModeSpace s{14, 6, false};
    auto t = squeezing_trap(100e3);
    t.l0 = 0.005e-3;
    const auto d = squeezing_drive(7000.0);
    PropagationSpec spec;
    spec.t_final = 50e-6;
    spec.n_outputs = 11;
    spec.step_tolerance = 1e-11;
    const auto lab = propagate(build_frame(Frame::lab, t, d, s), fock_state(s, 0, 0), spec);
    const auto inter = propagate(build_frame(Frame::interaction, t, d, s), fock_state(s, 0, 0), spec);
    double drift = 0.0;
    double frame = 0.0;
    for (std::size_t k = 0; k < lab.times.size(); ++k) {
      drift = std::max({drift, std::abs(lab.norm[k] - 1.0), std::abs(inter.norm[k] - 1.0)});
      frame = std::max({frame, std::abs(lab.mean_nx[k] - inter.mean_nx[k]),
                        std::abs(lab.mean_nz[k] - inter.mean_nz[k])});
    }
    v.detail << ", norm drift = " << drift << ", frame difference = " << frame;
    v.require(drift < 1e-6, "norm conservation");
    v.require(frame < 1e-6, "frame invariance");
  }

  // Coherent-state QFI.
  {
    const ModeSpace s{40, 2, false};
    double worst = 0.0;
    for (double theta : {0.0, 0.5, 1.3}) {
      worst = std::max(worst, std::abs(qfi_displacement(coherent_state(s, Mode::x, Complex(1.2, -0.5)), theta) - 2.0));
    }
    v.detail << ", coherent QFI error = " << worst;
    v.require(worst < 1e-6, "coherent QFI");
  }

  // Axial spectrum and equilibria.
  {
    ChainSpec c;
    c.n_ions = 10;
    c.length_scale_l = 10e-6;
    c.l0 = 1e-3;
    const auto tapered = mode_spectrum(c);
    c.l0 = std::numeric_limits<double>::infinity();
    const auto flat = mode_spectrum(c);
    const bool same = tapered.matrices.z == flat.matrices.z && tapered.z.gamma == flat.z.gamma;
    double residual = 0.0;
    for (int n : {2, 5, 10, 30}) residual = std::max(residual, equilibrium_residual(solve_equilibria(n)));
    v.detail << ", axial spectrum l0-independent = " << (same ? "yes" : "no")
             << ", equilibrium residual = " << residual;
    v.require(same, "axial spectrum");
    v.require(residual < 1e-12, "equilibrium residual");
  }

  // Squeezed-vacuum phonon number.
  {
    const ModeSpace s{60, 2, false};
    const double eps = 42.0;
    const auto a = ladder(s, Mode::x);
    const HarmonicHamiltonian h(-eps * (a.adjoint() * a.adjoint() + a * a));
    PropagationSpec spec;
    spec.t_final = 6e-3;
    spec.n_outputs = 13;
    spec.step_tolerance = 1e-11;
    const auto traj = propagate(h, fock_state(s, 0, 0), spec);
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      worst = std::max(worst, std::abs(traj.mean_nx[k] - std::pow(std::sinh(2.0 * eps * traj.times[k]), 2)));
    }
    v.detail << ", squeeze <n> error = " << worst;
    v.require(worst < 1e-8, "squeezed vacuum");
  }
}

void linearity(Verdict& v) {
  const auto t = squeezing_trap(100e3);
  auto d = squeezing_drive();
  const double e1 = effective_couplings(t, d).epsilon;
  d.amplitude *= 2.0;
  const double e2 = effective_couplings(t, d).epsilon;
  d.amplitude = 0.0;
  const double e0 = effective_couplings(t, d).epsilon;
  v.detail << "epsilon(2F)/epsilon(F) = " << e2 / e1 << ", epsilon(0) = " << e0;
  v.require(e2 / e1 == 2.0, "doubling");
  v.require(e0 == 0.0, "zero drive");
}

}  // namespace

int main() {
  std::vector<std::string> warnings;
  set_warning_handler([&](const std::string& m) { warnings.push_back(m); });

  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria{
      {"1 couplings limit", couplings_limit},
      {"2 time-averaged Hamiltonian equals closed form", averaging_equivalence},
      {"3 exact vs effective radial phonon number", exact_vs_effective},
      {"4 Kerr-coherent QFI", kerr_qfi},
      {"5 ion-chain frequency gap", chain_gap},
      {"6 invariant suite", invariants},
      {"7 squeezing-rate linearity", linearity},
  };

  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      check(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failures;
    std::printf("%s criterion %s (%.2f s): %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), seconds,
                v.detail.str().c_str());
    std::fflush(stdout);
  }
  for (const auto& w : warnings) std::printf("warning: %s\n", w.c_str());
  return failures == 0 ? 0 : 1;
}
