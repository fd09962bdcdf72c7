#include "tkerr/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "json.hpp"
#include "tkerr/constants.hpp"
#include "tkerr/errors.hpp"

namespace tkerr::cli {
namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"trap", {"omega_x_hz", "omega_y_hz", "omega_z_hz", "l0_mm", "mass_amu"}},
      {"drive",
       {"kind", "force_yn", "g_hz", "frequency_hz", "phase", "spin_phase_plus",
        "spin_phase_minus"}},
      {"space", {"dim_x", "dim_z", "spin"}},
      {"propagation",
       {"t_final_ms", "n_outputs", "frame", "step_tolerance", "norm_drift_limit", "method",
        "qfi_theta"}},
      {"chain", {"n_ions", "beta_x", "beta_y", "length_scale_um", "l0_mm"}},
      {"initial", {"n_x", "n_z", "spin", "alpha_re", "alpha_im", "alphas"}},
  };
  return keys;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

YAML::Node load_yaml(const std::string& text, const std::string& what) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

// Reads fields of one parsed document, in the order the caller asks for
// them, so that the first missing field is the one reported.
class Reader {
 public:
  explicit Reader(YAML::Node root) : root_(std::move(root)) {}

  bool has_section(const std::string& section) const {
    return root_[section] && !root_[section].IsNull();
  }
  bool has(const std::string& section, const std::string& key) const {
    return has_section(section) && root_[section][key] && !root_[section][key].IsNull();
  }

  std::string text(const std::string& key) const {
    const YAML::Node n = root_[key];
    if (!n || n.IsNull()) throw ConfigError("missing field: " + key);
    if (!n.IsScalar()) throw ConfigError("field " + key + ": expected a scalar");
    return n.Scalar();
  }

  std::string text(const std::string& section, const std::string& key) const {
    return scalar(section, key).Scalar();
  }
  std::string text(const std::string& section, const std::string& key,
                   const std::string& fallback) const {
    return has(section, key) ? text(section, key) : fallback;
  }

  double number(const std::string& section, const std::string& key,
                bool allow_infinite = false) const {
    const YAML::Node n = scalar(section, key);
    const std::string s = lower(n.Scalar());
    if (allow_infinite && (s == "inf" || s == "+inf" || s == ".inf" || s == "+.inf" ||
                           s == "infinity")) {
      return std::numeric_limits<double>::infinity();
    }
    double v = 0.0;
    try {
      v = n.as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError("field " + section + "." + key + ": expected a number, got '" +
                        n.Scalar() + "'");
    }
    if (std::isnan(v) || (!allow_infinite && std::isinf(v))) {
      throw ConfigError("field " + section + "." + key + ": expected a finite number");
    }
    return v;
  }
  double number_or(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? number(section, key) : fallback;
  }

  int integer(const std::string& section, const std::string& key) const {
    const YAML::Node n = scalar(section, key);
    try {
      return n.as<int>();
    } catch (const YAML::Exception&) {
      throw ConfigError("field " + section + "." + key + ": expected an integer, got '" +
                        n.Scalar() + "'");
    }
  }
  int integer_or(const std::string& section, const std::string& key, int fallback) const {
    return has(section, key) ? integer(section, key) : fallback;
  }

  bool boolean(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const YAML::Node n = scalar(section, key);
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      throw ConfigError("field " + section + "." + key + ": expected true or false, got '" +
                        n.Scalar() + "'");
    }
  }

  std::vector<double> numbers(const std::string& section, const std::string& key) const {
    const YAML::Node n = root_[section][key];
    if (!n || !n.IsSequence() || n.size() == 0) {
      throw ConfigError("field " + section + "." + key + ": expected a non-empty list");
    }
    std::vector<double> out;
    for (const auto& item : n) {
      try {
        out.push_back(item.as<double>());
      } catch (const YAML::Exception&) {
        throw ConfigError("field " + section + "." + key + ": expected numbers");
      }
    }
    return out;
  }

 private:
  YAML::Node scalar(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw ConfigError("missing field: " + section + "." + key);
    const YAML::Node n = root_[section][key];
    if (!n.IsScalar()) throw ConfigError("field " + section + "." + key + ": expected a scalar");
    return n;
  }

  YAML::Node root_;
};

Experiment parse_experiment(const std::string& name) {
  static const std::map<std::string, Experiment> names{
      {"fig2", Experiment::fig2},
      {"fig3", Experiment::fig3},
      {"couplings", Experiment::couplings},
      {"chain-gap", Experiment::chain_gap},
      {"spin-squeeze", Experiment::spin_squeeze},
      {"custom", Experiment::custom},
  };
  const auto it = names.find(name);
  if (it == names.end()) {
    throw ConfigError("field experiment: unknown experiment '" + name +
                      "' (fig2, fig3, couplings, chain-gap, spin-squeeze, custom)");
  }
  return it->second;
}

void check_known_keys(const YAML::Node& root) {
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping of sections");
  for (const auto& entry : root) {
    const std::string name = entry.first.Scalar();
    if (name == "experiment" || name == "output") continue;
    const auto section = known_keys().find(name);
    if (section == known_keys().end()) throw ConfigError("unknown section: " + name);
    if (entry.second.IsNull()) continue;
    if (!entry.second.IsMap()) throw ConfigError("section " + name + " must be a mapping");
    for (const auto& field : entry.second) {
      const std::string key = field.first.Scalar();
      if (!section->second.count(key)) throw ConfigError("unknown field: " + name + "." + key);
    }
  }
}

void read_trap(const Reader& r, RunConfig& c) {
  c.trap.omega_x = angular(r.number("trap", "omega_x_hz"));
  c.trap.omega_z = angular(r.number("trap", "omega_z_hz"));
  c.trap.omega_y = r.has("trap", "omega_y_hz") ? angular(r.number("trap", "omega_y_hz"))
                                               : c.trap.omega_x;
  c.trap.l0 = r.number("trap", "l0_mm", true) * 1e-3;
  c.trap.mass = r.number_or("trap", "mass_amu", 40.0) * kAtomicMassUnit;
  c.has_trap = true;
}

void read_drive(const Reader& r, RunConfig& c, bool force_required) {
  const std::string kind = r.text("drive", "kind", c.experiment == Experiment::spin_squeeze
                                                       ? "spin"
                                                       : "classical");
  if (kind == "classical") {
    c.drive.kind = DriveKind::classical;
    const double force_yn =
        force_required ? r.number("drive", "force_yn") : r.number_or("drive", "force_yn", 0.0);
    c.drive.amplitude = force_yn * 1e-24;
  } else if (kind == "spin") {
    c.drive.kind = DriveKind::spin;
    c.drive.amplitude = force_required ? angular(r.number("drive", "g_hz"))
                                       : angular(r.number_or("drive", "g_hz", 0.0));
  } else {
    throw ConfigError("field drive.kind: expected classical or spin, got '" + kind + "'");
  }
  c.drive.frequency = angular(r.number("drive", "frequency_hz"));
  c.drive.phase = r.number_or("drive", "phase", c.drive.phase);
  c.drive.spin_phase_plus = r.number_or("drive", "spin_phase_plus", c.drive.spin_phase_plus);
  c.drive.spin_phase_minus = r.number_or("drive", "spin_phase_minus", c.drive.spin_phase_minus);
  c.has_drive = true;
}

void read_space(const Reader& r, RunConfig& c) {
  c.space.dim_x = r.integer_or("space", "dim_x", 40);
  c.space.dim_z = r.integer_or("space", "dim_z", 12);
  c.space.spin = r.boolean("space", "spin", false);
  c.has_space = true;
}

void read_propagation(const Reader& r, RunConfig& c) {
  auto& p = c.propagation;
  p.t_final = r.number("propagation", "t_final_ms") * 1e-3;
  p.n_outputs = r.integer("propagation", "n_outputs");
  p.step_tolerance = r.number_or("propagation", "step_tolerance", p.step_tolerance);
  p.norm_drift_limit = r.number_or("propagation", "norm_drift_limit", p.norm_drift_limit);
  p.qfi_theta = r.number_or("propagation", "qfi_theta", p.qfi_theta);

  const std::string frame = r.text("propagation", "frame", "interaction");
  if (frame == "lab") {
    p.frame = Frame::lab;
  } else if (frame == "interaction") {
    p.frame = Frame::interaction;
  } else if (frame == "effective") {
    p.frame = Frame::effective;
  } else {
    throw ConfigError("field propagation.frame: expected lab, interaction or effective");
  }

  const std::string method = r.text("propagation", "method", "automatic");
  if (method == "automatic") {
    p.method = PropagationMethod::automatic;
  } else if (method == "direct") {
    p.method = PropagationMethod::direct;
  } else if (method == "stroboscopic") {
    p.method = PropagationMethod::stroboscopic;
  } else {
    throw ConfigError("field propagation.method: expected automatic, direct or stroboscopic");
  }
  c.has_propagation = true;
}

void read_chain(const Reader& r, RunConfig& c) {
  c.chain.n_ions = r.integer("chain", "n_ions");
  c.chain.beta_x = r.number("chain", "beta_x");
  c.chain.beta_y = r.number_or("chain", "beta_y", c.chain.beta_x);
  c.chain.length_scale_l = r.number("chain", "length_scale_um") * 1e-6;
  c.chain.l0 = r.number("chain", "l0_mm", true) * 1e-3;
  c.has_chain = true;
}

void read_initial(const Reader& r, RunConfig& c) {
  auto& s = c.initial;
  s.n_x = r.integer_or("initial", "n_x", 0);
  s.n_z = r.integer_or("initial", "n_z", 0);
  const std::string spin = r.text("initial", "spin", "up");
  if (spin == "up") {
    s.spin_level = 0;
  } else if (spin == "down") {
    s.spin_level = 1;
  } else {
    throw ConfigError("field initial.spin: expected up or down");
  }
  if (r.has("initial", "alpha_re") || r.has("initial", "alpha_im")) {
    s.coherent_alpha = Complex(r.number_or("initial", "alpha_re", 0.0),
                               r.number_or("initial", "alpha_im", 0.0));
  }
  if (r.has("initial", "alphas")) s.alphas = r.numbers("initial", "alphas");
}

// Converts the exceptions of the library's own validation into config
// errors; physics errors such as a resonance pole pass through.
template <typename F>
void validated(const std::string& section, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("section " + section + ": " + e.what());
  } catch (const InvalidSpaceError& e) {
    throw ConfigError("section " + section + ": " + e.what());
  }
}

nlohmann::json to_json_value(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      nlohmann::json j = nlohmann::json::object();
      for (const auto& entry : n) j[entry.first.Scalar()] = to_json_value(entry.second);
      return j;
    }
    case YAML::NodeType::Sequence: {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& item : n) j.push_back(to_json_value(item));
      return j;
    }
    case YAML::NodeType::Scalar: {
      long long i = 0;
      double d = 0.0;
      bool b = false;
      if (YAML::convert<long long>::decode(n, i)) return i;
      if (YAML::convert<double>::decode(n, d) && std::isfinite(d)) return d;
      if (YAML::convert<bool>::decode(n, b)) return b;
      return n.Scalar();
    }
    default:
      return nullptr;
  }
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::fig2:
      return "fig2";
    case Experiment::fig3:
      return "fig3";
    case Experiment::couplings:
      return "couplings";
    case Experiment::chain_gap:
      return "chain-gap";
    case Experiment::spin_squeeze:
      return "spin-squeeze";
    case Experiment::custom:
      return "custom";
  }
  return "unknown";
}

ConfigDocument ConfigDocument::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  ConfigDocument doc(os.str());
  load_yaml(doc.text_, "config file " + path);  // surface syntax errors early
  return doc;
}

ConfigDocument ConfigDocument::from_string(const std::string& text) {
  ConfigDocument doc(text);
  load_yaml(doc.text_, "config");
  return doc;
}

void ConfigDocument::set(const std::string& dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dotted_key.empty() || (dot != std::string::npos &&
                             (dot == 0 || dot + 1 == dotted_key.size() ||
                              dotted_key.find('.', dot + 1) != std::string::npos))) {
    throw ConfigError("override key must be 'field' or 'section.field', got '" + dotted_key + "'");
  }
  overrides_.emplace_back(dotted_key, value);
}

void ConfigDocument::set_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must look like section.field=value, got '" + assignment + "'");
  }
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

namespace {

YAML::Node materialize(const std::string& text,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
  YAML::Node root = load_yaml(text, "config");
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping of sections");
  for (const auto& [key, value] : overrides) {
    const YAML::Node parsed = load_yaml(value, "override " + key);
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      root[key] = parsed;
    } else {
      const std::string section = key.substr(0, dot);
      if (!root[section] || root[section].IsNull()) root[section] = YAML::Node(YAML::NodeType::Map);
      root[section][key.substr(dot + 1)] = parsed;
    }
  }
  return root;
}

}  // namespace

RunConfig ConfigDocument::resolve() const {
  const YAML::Node root = materialize(text_, overrides_);
  const Reader r(root);

  RunConfig c;
  c.experiment = parse_experiment(r.text("experiment"));
  check_known_keys(root);
  if (root["output"] && !root["output"].IsNull()) c.output_path = r.text("output");

  const Experiment e = c.experiment;
  if (e != Experiment::chain_gap) {
    read_trap(r, c);
    const bool amplitude_required = e != Experiment::fig3;
    read_drive(r, c, amplitude_required);
    validated("trap", [&] { c.trap.validate(); });
    validated("drive", [&] { c.drive.validate(c.trap); });
  }
  if (e == Experiment::fig2 || e == Experiment::fig3 || e == Experiment::spin_squeeze ||
      e == Experiment::custom) {
    read_space(r, c);
    if (e == Experiment::spin_squeeze) c.space.spin = true;
    read_propagation(r, c);
    read_initial(r, c);
    validated("space", [&] { c.space.validate(); });
    validated("propagation", [&] { c.propagation.validate(); });
  }
  if (e == Experiment::chain_gap) {
    read_chain(r, c);
    validated("chain", [&] { c.chain.validate(); });
  }
  return c;
}

std::string ConfigDocument::to_json() const {
  return to_json_value(materialize(text_, overrides_)).dump();
}

}  // namespace tkerr::cli
