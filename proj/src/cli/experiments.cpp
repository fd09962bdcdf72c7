#include "tkerr/cli/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>

#include "json.hpp"
#include "tkerr/analytics.hpp"
#include "tkerr/chain.hpp"
#include "tkerr/cli/csv.hpp"
#include "tkerr/diagnostics.hpp"
#include "tkerr/dynamics.hpp"

namespace tkerr::cli {
namespace {

using nlohmann::json;

constexpr const char* kToolVersion = "0.1.0";

// Collects library warnings for the manifest while still printing them.
class WarningCapture {
 public:
  WarningCapture() {
    previous_ = set_warning_handler([this](const std::string& msg) {
      {
        std::lock_guard<std::mutex> lock(mutex_);
        messages_.push_back(msg);
      }
      if (previous_) previous_(msg);
    });
  }
  ~WarningCapture() { set_warning_handler(previous_); }
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  std::vector<std::string> messages() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return messages_;
  }

 private:
  WarningHandler previous_;
  mutable std::mutex mutex_;
  std::vector<std::string> messages_;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// JSON has no infinity; an untapered trap is recorded as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json si_parameters(const RunConfig& c) {
  json j = json::object();
  if (c.has_trap) {
    j["trap"] = {{"omega_x", c.trap.omega_x}, {"omega_y", c.trap.omega_y},
                 {"omega_z", c.trap.omega_z}, {"l0", finite_or_null(c.trap.l0)},
                 {"mass", c.trap.mass},       {"charge", c.trap.charge}};
  }
  if (c.has_drive) {
    j["drive"] = {{"kind", c.drive.kind == DriveKind::classical ? "classical" : "spin"},
                  {"amplitude", c.drive.amplitude},
                  {"frequency", c.drive.frequency},
                  {"phase", c.drive.phase},
                  {"spin_phase_plus", c.drive.spin_phase_plus},
                  {"spin_phase_minus", c.drive.spin_phase_minus}};
  }
  if (c.has_space) {
    j["space"] = {{"dim_x", c.space.dim_x}, {"dim_z", c.space.dim_z}, {"spin", c.space.spin}};
  }
  if (c.has_propagation) {
    const auto& p = c.propagation;
    const char* frame = p.frame == Frame::lab ? "lab"
                        : p.frame == Frame::interaction ? "interaction"
                                                        : "effective";
    const char* method = p.method == PropagationMethod::automatic ? "automatic"
                         : p.method == PropagationMethod::direct  ? "direct"
                                                                  : "stroboscopic";
    j["propagation"] = {{"t_final", p.t_final},
                        {"n_outputs", p.n_outputs},
                        {"frame", frame},
                        {"step_tolerance", p.step_tolerance},
                        {"norm_drift_limit", p.norm_drift_limit},
                        {"qfi_theta", p.qfi_theta},
                        {"method", method}};
  }
  if (c.has_chain) {
    j["chain"] = {{"n_ions", c.chain.n_ions},
                  {"beta_x", c.chain.beta_x},
                  {"beta_y", c.chain.beta_y},
                  {"length_scale_l", c.chain.length_scale_l},
                  {"l0", finite_or_null(c.chain.l0)}};
  }
  return j;
}

json derived_couplings(const RunConfig& c) {
  if (!c.has_trap || !c.has_drive) return nullptr;
  const auto k = effective_couplings(c.trap, c.drive);
  const auto v = resonance_check(c.trap, c.drive);
  return {{"lambda", c.trap.lambda()},
          {"drive_rate", drive_rate(c.trap, c.drive)},
          {"K", k.K},
          {"omega_eff", k.omega_eff},
          {"epsilon", k.epsilon},
          {"squeeze_re", k.squeeze.real()},
          {"squeeze_im", k.squeeze.imag()},
          {"chi_res", k.chi_res},
          {"offset", k.offset},
          {"validity",
           {{"lambda_over_sum", v.lambda_over_sum},
            {"lambda_over_difference", v.lambda_over_difference},
            {"lambda_over_axial", v.lambda_over_axial},
            {"drive_over_sum", v.drive_over_sum},
            {"drive_over_difference", v.drive_over_difference},
            {"worst", v.worst()},
            {"threshold", v.threshold},
            {"pass", v.pass}}}};
}

std::string resolve_output(const RunConfig& c, const std::string& override_path) {
  if (!override_path.empty()) return override_path;
  if (c.output_path.empty()) throw ConfigError("missing field: output");
  return c.output_path;
}

void write_manifest(const std::string& path, const json& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open manifest file " + path);
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error("write to manifest failed");
}

json trajectory_summary(const Trajectory& t) {
  return {{"steps", t.steps},
          {"rejected_steps", t.rejected},
          {"stroboscopic", t.stroboscopic},
          {"period", t.period},
          {"propagated_dim", t.reduced_dim},
          {"max_norm_drift",
           std::accumulate(t.norm.begin(), t.norm.end(), 0.0,
                           [](double m, double n) { return std::max(m, std::abs(n - 1.0)); })},
          {"max_top_level_population",
           *std::max_element(t.top_level_population.begin(), t.top_level_population.end())}};
}

QuantumState initial_state(const RunConfig& c) {
  if (c.initial.coherent_alpha) return coherent_state(c.space, Mode::x, *c.initial.coherent_alpha);
  if (c.initial.n_x < 0 || c.initial.n_x >= c.space.dim_x || c.initial.n_z < 0 ||
      c.initial.n_z >= c.space.dim_z) {
    throw ConfigError("initial Fock levels lie outside the truncated space");
  }
  if (c.initial.spin_level == 1 && !c.space.spin) {
    throw ConfigError("initial.spin = down needs space.spin = true");
  }
  return fock_state(c.space, c.initial.n_x, c.initial.n_z, c.initial.spin_level);
}

json paired_run(const RunConfig& c, const QuantumState& psi0, const std::string& csv_path) {
  Fig2Result r;
  if (c.experiment == Experiment::fig2) {
    r = record_fig2(c.trap, c.drive, c.space, c.propagation);
  } else {
    if (c.propagation.frame == Frame::effective) {
      throw ConfigError("propagation.frame must be lab or interaction for a paired run");
    }
    r.exact = propagate(build_frame(c.propagation.frame, c.trap, c.drive, c.space), psi0,
                        c.propagation);
    PropagationSpec eff = c.propagation;
    eff.method = PropagationMethod::direct;
    r.effective = propagate(build_frame(Frame::effective, c.trap, c.drive, c.space), psi0, eff);
  }

  CsvWriter csv(csv_path, {"t", "mean_nx_exact", "mean_nx_effective", "norm_exact"});
  double max_diff = 0.0;
  for (std::size_t k = 0; k < r.exact.times.size(); ++k) {
    csv.row({r.exact.times[k], r.exact.mean_nx[k], r.effective.mean_nx[k], r.exact.norm[k]});
    max_diff = std::max(max_diff, std::abs(r.exact.mean_nx[k] - r.effective.mean_nx[k]));
  }
  return {{"max_abs_mean_nx_difference", max_diff},
          {"exact", trajectory_summary(r.exact)},
          {"effective", trajectory_summary(r.effective)}};
}

json fig3_run(const RunConfig& c, const std::string& csv_path) {
  if (c.drive.amplitude != 0.0) {
    throw ConfigError("fig3 compares against the pure Kerr closed form and needs a zero drive amplitude");
  }
  const auto k = effective_couplings(c.trap, c.drive);
  const auto h = build_frame(Frame::effective, c.trap, c.drive, c.space);

  CsvWriter csv(csv_path, {"t", "alpha", "qfi_numeric", "qfi_closed_form"});
  json per_alpha = json::array();
  for (double alpha : c.initial.alphas) {
    const auto psi0 = coherent_state(c.space, Mode::x, Complex(alpha, 0.0));
    const auto traj = propagate(h, psi0, c.propagation);
    double worst = 0.0;
    double peak = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      const double closed = kerr_state_moments(alpha, k.K, k.omega_eff, traj.times[i]).qfi;
      csv.row({traj.times[i], alpha, traj.qfi[i], closed});
      worst = std::max(worst, std::abs(traj.qfi[i] - closed) / std::abs(closed));
      peak = std::max(peak, traj.qfi[i]);
    }
    per_alpha.push_back({{"alpha", alpha},
                         {"max_relative_deviation", worst},
                         {"max_qfi", peak},
                         {"trajectory", trajectory_summary(traj)}});
  }
  return {{"alphas", per_alpha}};
}

json custom_run(const RunConfig& c, const std::string& csv_path) {
  const auto traj = propagate(build_frame(c.propagation.frame, c.trap, c.drive, c.space),
                              initial_state(c), c.propagation);
  CsvWriter csv(csv_path, {"t", "mean_nx", "mean_nz", "qfi", "norm", "top_level_population"});
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    csv.row({traj.times[k], traj.mean_nx[k], traj.mean_nz[k], traj.qfi[k], traj.norm[k],
             traj.top_level_population[k]});
  }
  return {{"trajectory", trajectory_summary(traj)}};
}

json chain_run(const RunConfig& c, const std::string& csv_path) {
  const auto s = mode_spectrum(c.chain);
  CsvWriter csv(csv_path, {"mode", "u", "freq_z", "freq_x", "freq_y", "b_top_x"});
  for (Eigen::Index p = 0; p < s.equilibria_u.size(); ++p) {
    csv.row({static_cast<double>(p), s.equilibria_u(p), s.z.freqs(p), s.x.freqs(p), s.y.freqs(p),
             s.x.vectors(p, 0)});
  }
  return {{"gap", s.gap},
          {"linear_trap_gap", linear_trap_gap(c.chain.beta_x)},
          {"com_overlap", s.com_overlap},
          {"equilibrium_residual", equilibrium_residual(s.equilibria_u)}};
}

json couplings_run(const RunConfig& c, const std::string& csv_path) {
  const auto k = effective_couplings(c.trap, c.drive);
  const auto v = resonance_check(c.trap, c.drive);
  CsvWriter csv(csv_path, {"lambda", "drive_rate", "K", "omega_eff", "epsilon", "chi_res",
                           "offset", "validity_worst"});
  csv.row({c.trap.lambda(), drive_rate(c.trap, c.drive), k.K, k.omega_eff, k.epsilon, k.chi_res,
           k.offset, v.worst()});
  return json::object();
}

json base_manifest(const ConfigDocument& doc, const RunConfig& c) {
  return {{"tool", "tkerr"},
          {"version", kToolVersion},
          {"experiment", to_string(c.experiment)},
          {"timestamp", utc_timestamp()},
          {"config", json::parse(doc.to_json())},
          {"parameters_si", si_parameters(c)},
          {"derived", derived_couplings(c)}};
}

std::vector<std::pair<std::string, double>> sweep_observables(const RunConfig& c) {
  switch (c.experiment) {
    case Experiment::couplings: {
      const auto k = effective_couplings(c.trap, c.drive);
      return {{"lambda", c.trap.lambda()}, {"drive_rate", drive_rate(c.trap, c.drive)},
              {"K", k.K},                  {"omega_eff", k.omega_eff},
              {"epsilon", k.epsilon},      {"chi_res", k.chi_res}};
    }
    case Experiment::chain_gap: {
      const auto s = mode_spectrum(c.chain);
      return {{"gap", s.gap}, {"com_overlap", s.com_overlap}};
    }
    default:
      throw ConfigError("sweep supports the couplings and chain-gap experiments, not " +
                        to_string(c.experiment));
  }
}

std::string format_grid_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::Cell grid_cell(const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  return text;
}

}  // namespace

RunOutput run_experiment(const ConfigDocument& doc, const std::string& output_override) {
  WarningCapture capture;
  const RunConfig c = doc.resolve();
  const std::string csv_path = resolve_output(c, output_override);
  json manifest = base_manifest(doc, c);

  json results;
  switch (c.experiment) {
    case Experiment::couplings:
      results = couplings_run(c, csv_path);
      break;
    case Experiment::fig2:
      results = paired_run(c, fock_state(c.space, 0, 0), csv_path);
      break;
    case Experiment::spin_squeeze:
      results = paired_run(c, initial_state(c), csv_path);
      break;
    case Experiment::fig3:
      results = fig3_run(c, csv_path);
      break;
    case Experiment::chain_gap:
      results = chain_run(c, csv_path);
      break;
    case Experiment::custom:
      results = custom_run(c, csv_path);
      break;
  }

  RunOutput out{csv_path, csv_path + ".manifest.json", capture.messages()};
  manifest["results"] = results;
  manifest["warnings"] = out.warnings;
  manifest["csv"] = csv_path;
  write_manifest(out.manifest_path, manifest);
  return out;
}

GridAxis parse_grid(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("grid must look like key=start:stop:count or key=v1,v2,..., got '" + spec +
                      "'");
  }
  GridAxis axis{spec.substr(0, eq), {}};
  const std::string body = spec.substr(eq + 1);

  if (body.find(':') != std::string::npos) {
    double start = 0.0;
    double stop = 0.0;
    long count = 0;
    char tail = 0;
    if (std::sscanf(body.c_str(), "%lf:%lf:%ld%c", &start, &stop, &count, &tail) != 3) {
      throw ConfigError("grid " + axis.key + ": expected start:stop:count, got '" + body + "'");
    }
    if (count < 0) throw ConfigError("grid " + axis.key + ": negative point count");
    for (long i = 0; i < count; ++i) {
      const double v = count == 1 ? start : start + (stop - start) * i / (count - 1);
      axis.values.push_back(format_grid_value(v));
    }
  } else {
    std::size_t begin = 0;
    while (begin <= body.size() && !body.empty()) {
      const auto comma = body.find(',', begin);
      const std::string item =
          body.substr(begin, comma == std::string::npos ? std::string::npos : comma - begin);
      if (item.empty()) throw ConfigError("grid " + axis.key + ": empty list element");
      axis.values.push_back(item);
      if (comma == std::string::npos) break;
      begin = comma + 1;
    }
  }
  if (axis.values.empty()) throw ConfigError("grid " + axis.key + " has no points");
  return axis;
}

RunOutput run_sweep(const ConfigDocument& doc, const std::vector<GridAxis>& grid,
                    const std::string& output_override) {
  WarningCapture capture;
  if (grid.empty() || grid.size() > 2) {
    throw ConfigError("sweep needs one or two grid axes, got " + std::to_string(grid.size()));
  }
  for (const auto& axis : grid) {
    if (axis.values.empty()) throw ConfigError("grid " + axis.key + " has no points");
  }

  const RunConfig base = doc.resolve();
  const std::string csv_path = resolve_output(base, output_override);
  sweep_observables(base);  // rejects unsupported experiments before any output

  std::vector<std::string> header;
  for (const auto& axis : grid) header.push_back(axis.key);
  header.push_back("observable");
  header.push_back("value");
  CsvWriter csv(csv_path, header);

  const std::size_t n0 = grid[0].values.size();
  const std::size_t n1 = grid.size() > 1 ? grid[1].values.size() : 1;
  for (std::size_t i = 0; i < n0; ++i) {
    for (std::size_t j = 0; j < n1; ++j) {
      ConfigDocument point = doc;
      point.set(grid[0].key, grid[0].values[i]);
      if (grid.size() > 1) point.set(grid[1].key, grid[1].values[j]);
      const RunConfig c = point.resolve();
      for (const auto& [name, value] : sweep_observables(c)) {
        std::vector<CsvWriter::Cell> row{grid_cell(grid[0].values[i])};
        if (grid.size() > 1) row.push_back(grid_cell(grid[1].values[j]));
        row.emplace_back(name);
        row.emplace_back(value);
        csv.row(row);
      }
    }
  }

  json manifest = base_manifest(doc, base);
  json axes = json::array();
  for (const auto& axis : grid) axes.push_back({{"key", axis.key}, {"values", axis.values}});
  manifest["grid"] = axes;

  RunOutput out{csv_path, csv_path + ".manifest.json", capture.messages()};
  manifest["warnings"] = out.warnings;
  manifest["csv"] = csv_path;
  write_manifest(out.manifest_path, manifest);
  return out;
}

}  // namespace tkerr::cli
