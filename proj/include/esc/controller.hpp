#pragma once

#include "esc/plant.hpp"

#include <limits>
#include <string>
#include <vector>

namespace esc {

enum class ScalingMode {
  /// Slow-time redesign: slope and sliding gain scaled by eta, rho from the
  /// eta-weighted bound.
  kScaled,
  /// Static-map design (eta treated as 1).
  kUnscaled,
};

const char* to_string(ScalingMode mode);
ScalingMode scaling_mode_from_string(const std::string& name);

struct ControllerParams {
  double p = 1.0;           ///< reference slope
  double p0 = 0.0;          ///< initial reference
  double y_sat = std::numeric_limits<double>::infinity();  ///< reference cap
  double lambda = 4.0;      ///< sliding gain
  double epsilon_sw = 0.02; ///< switching band width
  double gamma = 0.1;       ///< modulation margin
  double L_h = 0.1;         ///< gradient lower bound outside the vicinity
  double eta = 0.01;        ///< time-scale parameter, in (0, 1]
  double T_s = 5.0;         ///< search cycle period
  double ts_scale = 1.0;    ///< multiplies T_s (e.g. 1/eta for slow-time periods)
  int n_dirs = 2;           ///< number of search directions
  ScalingMode scaling_mode = ScalingMode::kScaled;

  /// Period actually used by the scheduler.
  double period() const noexcept { return T_s * ts_scale; }

  struct Violation {
    std::string field;
    std::string message;
  };
  /// All invariant violations, with "controller."-prefixed field paths.
  std::vector<Violation> violations() const;
  /// Throws ConfigError listing every violation.
  void validate() const;
};

struct EffectiveGains {
  double p_eff = 0.0;
  double lambda_eff = 0.0;
  double rho = 0.0;
};

EffectiveGains effective_gains(const ControllerParams& params);

struct ControllerState {
  double y_m = 0.0;    ///< reference
  double s_int = 0.0;  ///< lambda_eff * integral of sgn(e)
  double t = 0.0;      ///< controller clock
  int dir_index = 1;   ///< active direction, 1-based
};

ControllerState initial_state(const ControllerParams& params);

/// y_m <- min(y_m + p_eff dt, y_sat).
double reference_step(ControllerState& state, double p_eff, double y_sat, double dt);

/// e + s_int at the current state.
inline double sliding_variable(const ControllerState& state, double e) {
  return e + state.s_int;
}

/// s_int <- s_int + lambda_eff sgn(e) dt with sgn(0) = 0; returns e + s_int.
double sliding_variable_step(ControllerState& state, double e, double lambda_eff,
                             double dt);

struct Direction {
  int index = 1;  ///< 1-based
  Vector sigma;   ///< standard basis vector a_index
};

/// Cyclic search: index = floor(mod(t, T_s) / (T_s / n)) + 1.
int cyclic_direction_index(double t, double T_s, int n_dirs);
Direction cyclic_direction(double t, double T_s, int n_dirs);

/// sgn(sin(pi s / eps)) with sgn(0) = +1, evaluated from the parity of the
/// band index floor(s / eps) so large |s| does not lose the sign to rounding.
double switching_sign(double s, double epsilon_sw);

/// u = rho * sigma * sgn(sin(pi s / eps)).
Vector control_law(double rho, const Vector& sigma, double s, double epsilon_sw);

struct Telemetry {
  double y_m = 0.0;
  double e = 0.0;
  double s = 0.0;
  int dir_index = 1;
  double rho = 0.0;
};

/**
 * One controller update over [t, t + dt).
 *
 * e = y - y_m and s = e + s_int are formed from the state at t, u is emitted
 * from them and the direction active at t, then y_m, s_int and t are advanced
 * (explicit Euler, same clock as the plant). `u` must have n_dirs entries.
 * Throws SimulationAbort on a non-finite measurement.
 */
Telemetry controller_step(const ControllerParams& params, const EffectiveGains& gains,
                          ControllerState& state, double y, double dt,
                          Eigen::Ref<Vector> u);

struct ControllerOutput {
  Vector u;
  Telemetry telemetry;
};

ControllerOutput controller_step(const ControllerParams& params,
                                 const EffectiveGains& gains, ControllerState& state,
                                 double y, double dt);

}  // namespace esc
