#include "tkerr/cli/app.hpp"

#include <exception>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tkerr/cli/config.hpp"
#include "tkerr/cli/experiments.hpp"
#include "tkerr/errors.hpp"

namespace tkerr::cli {
namespace {

struct Failure {
  int code;
  const char* kind;
  const char* type;
};

Failure classify(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return {kExitConfig, "config", "ConfigError"};
  if (dynamic_cast<const std::invalid_argument*>(&e)) {
    return {kExitConfig, "config", "InvalidArgument"};
  }
  if (dynamic_cast<const InvalidSpaceError*>(&e)) return {kExitConfig, "config", "InvalidSpace"};
  if (dynamic_cast<const SpaceMismatchError*>(&e)) {
    return {kExitConfig, "config", "SpaceMismatch"};
  }
  if (dynamic_cast<const TruncationLeakageError*>(&e)) {
    return {kExitConfig, "config", "TruncationLeakage"};
  }
  if (dynamic_cast<const ResonancePoleError*>(&e)) return {kExitPhysics, "physics", "ResonancePole"};
  if (dynamic_cast<const WrongDriveKindError*>(&e)) {
    return {kExitPhysics, "physics", "WrongDriveKind"};
  }
  if (dynamic_cast<const InstabilityError*>(&e)) return {kExitPhysics, "physics", "Instability"};
  if (dynamic_cast<const ConvergenceError*>(&e)) return {kExitPhysics, "physics", "Convergence"};
  if (dynamic_cast<const PhysicsError*>(&e)) return {kExitPhysics, "physics", "PhysicsError"};
  if (dynamic_cast<const IntegrationError*>(&e)) {
    return {kExitIntegration, "integration", "IntegrationError"};
  }
  return {kExitInternal, "internal", "Error"};
}

int report(std::ostream& err, int code, const char* kind, const char* type,
           const std::string& message) {
  const nlohmann::json line{{"status", "error"},
                            {"exit_code", code},
                            {"kind", kind},
                            {"type", type},
                            {"message", message}};
  err << line.dump() << std::endl;
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tapered-trap Kerr oscillator and ion-chain simulator", "tkerr"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  std::vector<std::string> overrides;
  std::vector<std::string> grids;

  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("config", config_path, "YAML config file")->required();
  run->add_option("--set", overrides, "Override a config value: section.field=value");
  run->add_option("-o,--output", output, "CSV output path (overrides the config)");

  auto* sweep = app.add_subcommand("sweep", "Sweep config values over a grid");
  sweep->add_option("config", config_path, "YAML config file")->required();
  sweep->add_option("--grid", grids, "section.field=start:stop:count or section.field=v1,v2,...")
      ->required();
  sweep->add_option("--set", overrides, "Override a config value: section.field=value");
  sweep->add_option("-o,--output", output, "CSV output path (overrides the config)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report(err, kExitConfig, "config", "UsageError", e.what());
  }

  try {
    auto doc = ConfigDocument::from_file(config_path);
    for (const auto& assignment : overrides) doc.set_override(assignment);

    RunOutput result;
    if (run->parsed()) {
      result = run_experiment(doc, output);
    } else {
      std::vector<GridAxis> axes;
      for (const auto& g : grids) axes.push_back(parse_grid(g));
      result = run_sweep(doc, axes, output);
    }
    out << "wrote " << result.csv_path << '\n' << "wrote " << result.manifest_path << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    const Failure f = classify(e);
    return report(err, f.code, f.kind, f.type, e.what());
  }
}

}  // namespace tkerr::cli
