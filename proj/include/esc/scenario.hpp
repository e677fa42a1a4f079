#pragma once

#include "esc/controller.hpp"
#include "esc/plant.hpp"
#include "esc/sim.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace esc {

/// Objective as written in a scenario file.
///   "quadratic":         y_star, z_star, H
///   "coupled_quadratic": y_star, z_star, coupling
///   "linear":            c, offset (no maximum)
struct MapSpec {
  std::string kind = "coupled_quadratic";
  double y_star = 0.0;
  Vector z_star;
  Matrix H;
  double coupling = 0.0;
  Vector c;
  double offset = 0.0;

  StaticMap build() const;
  /// Known optimum, if the kind has one.
  std::optional<Optimum> optimum() const;
};

struct PlantSpec {
  Matrix A, B, C;
  double time_scale = 1.0;
  MapSpec map;
};

struct AnalysisParams {
  std::optional<double> delta;  ///< default sqrt(epsilon_sw)
  double trailing_fraction = 0.1;
  double c_bound = 2.5;
};

struct Scenario {
  std::string name;
  std::string description;
  PlantSpec plant;
  ControllerParams controller;
  SimConfig sim;
  AnalysisParams analysis;
};

bool operator==(const Scenario& a, const Scenario& b);

struct LoadOptions {
  std::vector<std::string> overrides;  ///< "dot.path=value"
  bool allow_unstable = false;
  std::optional<bool> dt_guard;        ///< overrides sim.dt_guard when set
};

/// Parse + validate. Throws ConfigError (with the field path) on invalid
/// content; std::runtime_error for unreadable files.
Scenario load_scenario(const std::filesystem::path& path, const LoadOptions& options = {});
Scenario scenario_from_json(nlohmann::json doc, const LoadOptions& options = {});

nlohmann::json to_json(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Applies "key=value" to a scenario document. The key is a dot-path
/// ("sim.dt"); a bare leaf name ("dt") is accepted when it is unique across
/// sections. The value is parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Full dot-path of a numeric scenario field given its path or unique leaf
/// name ("eta" -> "controller.eta"); nullopt when unknown.
std::optional<std::string> resolve_numeric_field(const std::string& name);

/// Re-checks every invariant (controller, sim, plant construction, H3/H4).
void validate(const Scenario& scenario);

CascadePlant build_plant(const Scenario& scenario);

}  // namespace esc
