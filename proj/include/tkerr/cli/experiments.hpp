#pragma once

// Experiment orchestration behind `tkerr run` and `tkerr sweep`.

#include <string>
#include <vector>

#include "tkerr/cli/config.hpp"

namespace tkerr::cli {

struct RunOutput {
  std::string csv_path;
  std::string manifest_path;
  std::vector<std::string> warnings;
};

/// Runs the configured experiment and writes `<csv>` plus
/// `<csv>.manifest.json`. A non-empty `output_override` replaces the
/// config's `output` field.
RunOutput run_experiment(const ConfigDocument& doc, const std::string& output_override = "");

/// One swept config key with its grid values (kept as text so that "inf"
/// survives).
struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

/// Parses "key=start:stop:count" (inclusive linear grid) or
/// "key=v1,v2,...". Throws ConfigError on malformed or empty grids.
GridAxis parse_grid(const std::string& spec);

/// Long-format sweep over one or two axes (Cartesian product): one CSV row
/// per grid point per observable. Supported for `couplings` and
/// `chain-gap`.
RunOutput run_sweep(const ConfigDocument& doc, const std::vector<GridAxis>& grid,
                    const std::string& output_override = "");

}  // namespace tkerr::cli
