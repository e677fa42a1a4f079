#include "esc/runner.hpp"

#include <chrono>

namespace esc {

RunOutcome run_scenario(const Scenario& sc) {
  const CascadePlant plant = build_plant(sc);
  RunOutcome out;
  const auto start = std::chrono::steady_clock::now();
  out.trajectory = run(plant, sc.controller, sc.sim);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (const auto opt = sc.plant.map.optimum()) {
    MetricsOptions mo;
    mo.delta = sc.analysis.delta;
    mo.trailing_fraction = sc.analysis.trailing_fraction;
    out.metrics = convergence_metrics(out.trajectory, opt->z_star, opt->y_star,
                                      sc.controller.epsilon_sw, sc.sim.dt, mo);
    const double eta = sc.controller.scaling_mode == ScalingMode::kScaled ? sc.controller.eta : 1.0;
    out.residual = residual_bound_check(*out.metrics, eta, sc.controller.epsilon_sw,
                                        sc.analysis.c_bound);
  }
  return out;
}

DtGuard scenario_dt_guard(const Scenario& sc) {
  const CascadePlant plant = build_plant(sc);
  return compute_dt_guard(plant, sc.controller, sc.plant.C * sc.sim.x0);
}

double guarded_dt(const Scenario& sc, double fraction) {
  return std::min(sc.sim.dt, fraction * scenario_dt_guard(sc).bound());
}

}  // namespace esc
