#include "tkerr/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

#include <Eigen/SparseCore>

#include "tkerr/analytics.hpp"
#include "tkerr/diagnostics.hpp"
#include "tkerr/errors.hpp"
#include "tkerr/ode.hpp"

namespace tkerr {
namespace {

const Complex kMinusI(0.0, -1.0);

using SparseRowMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

// Indices reachable from the support of psi through the union of the
// nonzero patterns of all Hamiltonian components, in ascending order.
std::vector<Eigen::Index> reachable_indices(const HarmonicHamiltonian& h, const CVector& psi) {
  const Eigen::Index n = psi.size();
  Eigen::MatrixXd pattern = h.static_part().matrix().cwiseAbs();
  for (const auto& term : h.terms()) {
    pattern += term.op.matrix().cwiseAbs();
    pattern += term.op.matrix().adjoint().cwiseAbs();
  }

  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::deque<Eigen::Index> queue;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (psi(i) != Complex(0.0, 0.0)) {
      seen[i] = 1;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const Eigen::Index i = queue.front();
    queue.pop_front();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!seen[j] && pattern(j, i) != 0.0) {
        seen[j] = 1;
        queue.push_back(j);
      }
    }
  }

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (seen[i]) keep.push_back(i);
  }
  return keep;
}

// H(t) on a subspace as one sparse matrix whose values are reassembled from
// per-component value arrays sharing the union pattern.
class SparseHarmonic {
 public:
  SparseHarmonic(const HarmonicHamiltonian& h, const std::vector<Eigen::Index>& keep) {
    const auto m = static_cast<Eigen::Index>(keep.size());
    auto restrict = [&](const CMatrix& full) -> CMatrix { return full(keep, keep); };

    std::vector<CMatrix> parts;
    parts.push_back(restrict(h.static_part().matrix()));
    for (const auto& term : h.terms()) {
      parts.push_back(restrict(term.op.matrix()));
      parts.push_back(parts.back().adjoint());
      freqs_.push_back(term.freq);
    }

    Eigen::MatrixXd pattern = Eigen::MatrixXd::Zero(m, m);
    for (const auto& p : parts) pattern += p.cwiseAbs();

    std::vector<Eigen::Triplet<Complex>> triplets;
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) {
        if (pattern(r, c) != 0.0) triplets.emplace_back(r, c, Complex(1.0, 0.0));
      }
    }
    matrix_.resize(m, m);
    matrix_.setFromTriplets(triplets.begin(), triplets.end());
    matrix_.makeCompressed();

    const auto nnz = matrix_.nonZeros();
    for (const auto& p : parts) {
      CVector values(nnz);
      Eigen::Index k = 0;
      for (Eigen::Index r = 0; r < m; ++r) {
        for (SparseRowMatrix::InnerIterator it(matrix_, r); it; ++it) values(k++) = p(r, it.col());
      }
      values_.push_back(std::move(values));
    }
    update(0.0);
  }

  const SparseRowMatrix& at(double t) {
    update(t);
    return matrix_;
  }

 private:
  void update(double t) {
    Eigen::Map<CVector> values(matrix_.valuePtr(), matrix_.nonZeros());
    values = values_[0];
    for (std::size_t k = 0; k < freqs_.size(); ++k) {
      const Complex phase = std::polar(1.0, freqs_[k] * t);
      values += phase * values_[1 + 2 * k] + std::conj(phase) * values_[2 + 2 * k];
    }
  }

  SparseRowMatrix matrix_;
  std::vector<CVector> values_;
  std::vector<double> freqs_;
};

class Recorder {
 public:
  Recorder(const ModeSpace& space, const PropagationSpec& spec, Trajectory& out)
      : space_(space), spec_(spec), out_(out) {}

  void record(double t, const CVector& psi) {
    const double norm = psi.norm();
    out_.times.push_back(t);
    out_.norm.push_back(norm);
    out_.mean_nx.push_back(mean_number(psi, space_, Mode::x));
    out_.mean_nz.push_back(mean_number(psi, space_, Mode::z));
    const QuantumState state(space_, psi, std::abs(norm - 1.0) + 1e-12);
    out_.qfi.push_back(qfi_displacement(state, spec_.qfi_theta));
    const double top = leakage(psi, space_);
    out_.top_level_population.push_back(top);

    if (top > kLeakageThreshold && !leak_reported_) {
      leak_reported_ = true;
      std::ostringstream os;
      os << "truncation leakage: top-level population " << top << " at t = " << t
         << " s exceeds " << kLeakageThreshold << " (dim_x = " << space_.dim_x
         << ", dim_z = " << space_.dim_z << ")";
      out_.warnings.push_back(os.str());
      warn(os.str());
    }
    if (std::abs(norm - 1.0) > spec_.norm_drift_limit) {
      std::ostringstream os;
      os << "norm drift |norm - 1| = " << std::abs(norm - 1.0) << " at t = " << t
         << " s exceeds the limit " << spec_.norm_drift_limit;
      throw IntegrationError(os.str());
    }
    if (spec_.store_states) out_.states.emplace_back(state);
  }

 private:
  const ModeSpace& space_;
  const PropagationSpec& spec_;
  Trajectory& out_;
  bool leak_reported_ = false;
};

// Number of periods per output interval, or 0 if the spacing is not an
// integer multiple of the period.
long periods_per_output(double period, double dt) {
  const double k = std::round(dt / period);
  if (k < 1.0 || std::abs(k * period - dt) > 1e-9 * dt) return 0;
  return static_cast<long>(k);
}

void propagate_direct(SparseHarmonic& h, CVector psi, const std::vector<Eigen::Index>& keep,
                      const std::vector<double>& times, const PropagationSpec& spec,
                      Recorder& recorder, CVector& full, Trajectory& out) {
  auto rhs = [&h](double t, const CVector& y, CVector& dy) { dy.noalias() = kMinusI * (h.at(t) * y); };
  DormandPrince<CVector, decltype(rhs)> solver(rhs, spec.step_tolerance);

  double t = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    solver.advance(t, psi, times[k]);
    full(keep) = psi;
    recorder.record(times[k], full);
  }
  out.steps = solver.steps();
  out.rejected = solver.rejected();
}

void propagate_stroboscopic(SparseHarmonic& h, CVector psi,
                            const std::vector<Eigen::Index>& keep, double period, long per_output,
                            const std::vector<double>& times, const PropagationSpec& spec,
                            Recorder& recorder, CVector& full, Trajectory& out) {
  const auto m = static_cast<Eigen::Index>(keep.size());
  auto rhs = [&h](double t, const CMatrix& y, CMatrix& dy) { dy.noalias() = kMinusI * (h.at(t) * y); };
  // Errors of the one-period propagator accumulate over every application,
  // so it is computed well below the per-step tolerance.
  const double tol = std::max(1e-13, 1e-2 * spec.step_tolerance);
  DormandPrince<CMatrix, decltype(rhs)> solver(rhs, tol);

  CMatrix u_period = CMatrix::Identity(m, m);
  double t = 0.0;
  solver.advance(t, u_period, period);

  CMatrix u_output = u_period;
  for (long k = 1; k < per_output; ++k) u_output = u_period * u_output;

  for (std::size_t k = 1; k < times.size(); ++k) {
    psi = u_output * psi;
    full(keep) = psi;
    recorder.record(times[k], full);
  }
  out.steps = solver.steps();
  out.rejected = solver.rejected();
}

}  // namespace

HarmonicHamiltonian build_frame(Frame frame, const TrapConfig& trap, const DriveConfig& drive,
                                const ModeSpace& space) {
  switch (frame) {
    case Frame::lab:
      return lab_frame(trap, drive, space);
    case Frame::interaction:
      return interaction_frame(trap, drive, space);
    case Frame::effective:
      return HarmonicHamiltonian(effective_hamiltonian(trap, drive, space));
  }
  throw std::invalid_argument("unknown frame");
}

void PropagationSpec::validate() const {
  if (!std::isfinite(t_final) || t_final <= 0.0) {
    throw std::invalid_argument("propagation t_final must be positive");
  }
  if (n_outputs < 2) throw std::invalid_argument("propagation needs n_outputs >= 2");
  if (!(step_tolerance > 0.0 && step_tolerance < 1e-2)) {
    throw std::invalid_argument("step_tolerance must lie in (0, 1e-2)");
  }
  if (!(norm_drift_limit > 0.0 && norm_drift_limit < 1e-2)) {
    throw std::invalid_argument("norm_drift_limit must lie in (0, 1e-2)");
  }
  if (!std::isfinite(qfi_theta)) throw std::invalid_argument("qfi_theta must be finite");
}

std::vector<double> PropagationSpec::output_times() const {
  std::vector<double> times(static_cast<std::size_t>(n_outputs));
  for (int k = 0; k < n_outputs; ++k) times[k] = t_final * k / (n_outputs - 1);
  return times;
}

Trajectory propagate(const HarmonicHamiltonian& hamiltonian, const QuantumState& psi0,
                     const PropagationSpec& spec) {
  spec.validate();
  if (!(psi0.space() == hamiltonian.space())) {
    throw SpaceMismatchError("initial state and Hamiltonian live on different spaces");
  }
  const ModeSpace& space = psi0.space();
  const auto times = spec.output_times();
  const auto keep = reachable_indices(hamiltonian, psi0.amplitudes());

  Trajectory out;
  out.reduced_dim = static_cast<long>(keep.size());
  Recorder recorder(space, spec, out);
  CVector full = psi0.amplitudes();
  recorder.record(0.0, full);

  const double dt = times[1] - times[0];
  const auto period = hamiltonian.period();
  const long per_output = period ? periods_per_output(*period, dt) : 0;

  bool stroboscopic = false;
  switch (spec.method) {
    case PropagationMethod::direct:
      break;
    case PropagationMethod::stroboscopic:
      if (per_output == 0) {
        throw std::invalid_argument(
            "stroboscopic propagation needs a periodic Hamiltonian whose period divides the "
            "output spacing");
      }
      stroboscopic = true;
      break;
    case PropagationMethod::automatic:
      stroboscopic = per_output > 0 && spec.t_final / *period >= 0.5 * static_cast<double>(keep.size());
      break;
  }

  SparseHarmonic h(hamiltonian, keep);
  const CVector psi = psi0.amplitudes()(keep);
  if (stroboscopic) {
    out.stroboscopic = true;
    out.period = *period;
    propagate_stroboscopic(h, psi, keep, *period, per_output, times, spec, recorder, full, out);
  } else {
    propagate_direct(h, psi, keep, times, spec, recorder, full, out);
  }
  return out;
}

double mean_number(const CVector& amplitudes, const ModeSpace& space, Mode mode) {
  if (amplitudes.size() != space.total_dim()) {
    throw SpaceMismatchError("mean_number: amplitude vector does not match the space");
  }
  double total = 0.0;
  for (int s = 0; s < space.spin_dim(); ++s) {
    for (int nz = 0; nz < space.dim_z; ++nz) {
      for (int nx = 0; nx < space.dim_x; ++nx) {
        const int n = mode == Mode::x ? nx : nz;
        total += n * std::norm(amplitudes(space.index(nx, nz, s)));
      }
    }
  }
  return total;
}

double qfi_displacement(const QuantumState& state, double theta) {
  const ModeSpace& space = state.space();
  const CVector& psi = state.amplitudes();
  const Complex up = std::polar(1.0 / std::sqrt(2.0), theta);  // coefficient of â†
  const Complex down = std::conj(up);                           // coefficient of â

  // φ = Ĝψ, built mode-locally.
  CVector phi = CVector::Zero(psi.size());
  for (int s = 0; s < space.spin_dim(); ++s) {
    for (int nz = 0; nz < space.dim_z; ++nz) {
      for (int nx = 0; nx < space.dim_x; ++nx) {
        const auto i = space.index(nx, nz, s);
        if (nx + 1 < space.dim_x) phi(i) += down * std::sqrt(nx + 1.0) * psi(space.index(nx + 1, nz, s));
        if (nx > 0) phi(i) += up * std::sqrt(static_cast<double>(nx)) * psi(space.index(nx - 1, nz, s));
      }
    }
  }
  const double mean = psi.dot(phi).real();
  return 4.0 * (phi.squaredNorm() - mean * mean);
}

Fig2Result record_fig2(const TrapConfig& trap, const DriveConfig& drive, const ModeSpace& space,
                       const PropagationSpec& spec) {
  if (spec.frame == Frame::effective) {
    throw std::invalid_argument("record_fig2 needs an exact frame (lab or interaction)");
  }
  const auto psi0 = fock_state(space, 0, 0);
  Fig2Result r;
  r.exact = propagate(build_frame(spec.frame, trap, drive, space), psi0, spec);
  PropagationSpec eff = spec;
  eff.method = PropagationMethod::direct;
  r.effective = propagate(build_frame(Frame::effective, trap, drive, space), psi0, eff);
  return r;
}

}  // namespace tkerr
