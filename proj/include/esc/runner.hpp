#pragma once

#include "esc/analysis.hpp"
#include "esc/scenario.hpp"

#include <optional>

namespace esc {

struct RunOutcome {
  Trajectory trajectory;
  std::optional<Metrics> metrics;        ///< maps with a known optimum only
  std::optional<ResidualCheck> residual;
  double seconds = 0.0;                  ///< wall time of the simulation
};

/// Simulates a validated scenario and evaluates it with its analysis settings.
RunOutcome run_scenario(const Scenario& scenario);

/// The dt guard evaluated at the scenario's initial output.
DtGuard scenario_dt_guard(const Scenario& scenario);

/// min(sim.dt, fraction * guard bound).
double guarded_dt(const Scenario& scenario, double fraction = 0.5);

}  // namespace esc
