#pragma once

// Run configuration: a YAML document with one section per library type,
// in lab units (Hz, mm, μm, yN, amu, ms). Parsed once into SI values.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tkerr/chain.hpp"
#include "tkerr/dynamics.hpp"
#include "tkerr/fock.hpp"
#include "tkerr/model.hpp"

namespace tkerr::cli {

/// Unreadable, malformed or incomplete configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { fig2, fig3, couplings, chain_gap, spin_squeeze, custom };

std::string to_string(Experiment e);

struct InitialState {
  int n_x = 0;
  int n_z = 0;
  int spin_level = 0;
  std::optional<Complex> coherent_alpha;  // radial coherent state instead of Fock
  std::vector<double> alphas{1.0, 1.5, 2.0};  // fig3 amplitudes
};

struct RunConfig {
  Experiment experiment = Experiment::couplings;
  std::string output_path;

  bool has_trap = false;
  bool has_drive = false;
  bool has_space = false;
  bool has_propagation = false;
  bool has_chain = false;

  TrapConfig trap;
  DriveConfig drive;
  ModeSpace space{40, 12, false};
  PropagationSpec propagation;
  ChainSpec chain;
  InitialState initial;
};

/// Raw document plus `--set section.key=value` overrides. Keys must be
/// dotted paths of at most two components.
class ConfigDocument {
 public:
  static ConfigDocument from_file(const std::string& path);
  static ConfigDocument from_string(const std::string& text);

  /// Value is parsed as a YAML scalar or flow sequence.
  void set(const std::string& dotted_key, const std::string& value);
  void set_override(const std::string& assignment);  // "key=value"

  /// Validates every field and converts to SI. Throws ConfigError naming
  /// the first missing or malformed field.
  RunConfig resolve() const;

  /// JSON text of the document as resolved (for the manifest).
  std::string to_json() const;

 private:
  explicit ConfigDocument(std::string yaml_text) : text_(std::move(yaml_text)) {}
  std::string text_;
  std::vector<std::pair<std::string, std::string>> overrides_;
};

}  // namespace tkerr::cli
