#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geolift/serialize.hpp"

namespace geolift {

struct RunOptions {
  std::optional<std::uint64_t> seed;
  bool trace = false;
  bool parallel = false;
  std::optional<std::string> out_dir;
};

struct TaskOutcome {
  std::string name;
  std::string kind;
  std::string status;  ///< ok, breach or error
  std::string message;
  std::string file;
};

struct ScenarioOutcome {
  /// 0: all tasks ok; 1: an invariant breach; 2: a task error.
  int exit_code = 0;
  std::vector<TaskOutcome> tasks;
  std::string summary_path;
};

/// Loads a YAML scenario and writes one JSON report per task plus
/// summary.json. Throws ConfigError when the file cannot be parsed or the
/// manifold cannot be resolved.
ScenarioOutcome run_scenario(const std::string& config_path, const RunOptions& opts = {});

/// Catalog id, or a path to a YAML file describing a manifold with constant
/// connection coefficients.
ManifoldSpec load_manifold(const std::string& id_or_path);

/// Writes <report stem>_<kind>.csv into out_dir and returns its path.
std::string emit_plot_data(const std::string& report_path, const std::string& kind, const std::string& out_dir = "");

}  // namespace geolift
