#include "esc/controller.hpp"

#include "esc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace esc {

const char* to_string(ScalingMode mode) {
  return mode == ScalingMode::kScaled ? "scaled" : "unscaled";
}

ScalingMode scaling_mode_from_string(const std::string& name) {
  if (name == "scaled") return ScalingMode::kScaled;
  if (name == "unscaled") return ScalingMode::kUnscaled;
  throw ConfigError("controller.scaling_mode",
                    "expected \"scaled\" or \"unscaled\", got \"" + name + "\"");
}

std::vector<ControllerParams::Violation> ControllerParams::violations() const {
  std::vector<Violation> out;
  auto positive = [&](const char* name, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      out.push_back({std::string("controller.") + name, "must be positive and finite"});
    }
  };
  positive("p", p);
  positive("lambda", lambda);
  positive("epsilon_sw", epsilon_sw);
  positive("gamma", gamma);
  positive("L_h", L_h);
  positive("T_s", T_s);
  positive("ts_scale", ts_scale);
  if (!(eta > 0.0 && eta <= 1.0)) {
    out.push_back({"controller.eta", "must lie in (0, 1]"});
  }
  if (n_dirs < 1) out.push_back({"controller.n_dirs", "must be at least 1"});
  if (!std::isfinite(p0)) out.push_back({"controller.p0", "must be finite"});
  if (std::isnan(y_sat) || !(y_sat >= p0)) {
    out.push_back({"controller.y_sat", "must be >= p0"});
  }
  return out;
}

void ControllerParams::validate() const {
  const auto list = violations();
  if (list.empty()) return;
  std::ostringstream os;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i) os << "; ";
    os << list[i].field << ": " << list[i].message;
  }
  throw ConfigError(list.front().field, os.str());
}

EffectiveGains effective_gains(const ControllerParams& params) {
  EffectiveGains g;
  if (params.scaling_mode == ScalingMode::kScaled) {
    const double eta = params.eta;
    g.p_eff = eta * params.p;
    g.lambda_eff = eta * params.lambda;
    g.rho = eta / params.L_h * (params.p + params.lambda) + eta * params.gamma;
  } else {
    g.p_eff = params.p;
    g.lambda_eff = params.lambda;
    g.rho = (params.p + params.lambda) / params.L_h + params.gamma;
  }
  return g;
}

ControllerState initial_state(const ControllerParams& params) {
  ControllerState s;
  s.y_m = std::min(params.p0, params.y_sat);
  s.dir_index = cyclic_direction_index(0.0, params.period(), params.n_dirs);
  return s;
}

double reference_step(ControllerState& state, double p_eff, double y_sat, double dt) {
  state.y_m = std::min(state.y_m + p_eff * dt, y_sat);
  return state.y_m;
}

double sliding_variable_step(ControllerState& state, double e, double lambda_eff,
                             double dt) {
  const double sgn = e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0);
  state.s_int += lambda_eff * sgn * dt;
  return e + state.s_int;
}

int cyclic_direction_index(double t, double T_s, int n_dirs) {
  double phase = std::fmod(t, T_s);
  if (phase < 0.0) phase += T_s;
  const int i = static_cast<int>(std::floor(phase / (T_s / n_dirs)));
  // phase / (T_s / n) can round up to n just below a period boundary.
  return std::clamp(i, 0, n_dirs - 1) + 1;
}

Direction cyclic_direction(double t, double T_s, int n_dirs) {
  Direction d;
  d.index = cyclic_direction_index(t, T_s, n_dirs);
  d.sigma = Vector::Unit(n_dirs, d.index - 1);
  return d;
}

double switching_sign(double s, double epsilon_sw) {
  const double q = s / epsilon_sw;
  const double band = std::floor(q);
  if (band == q) return 1.0;  // sin(k pi) = 0
  return std::fmod(band, 2.0) == 0.0 ? 1.0 : -1.0;
}

Vector control_law(double rho, const Vector& sigma, double s, double epsilon_sw) {
  return rho * switching_sign(s, epsilon_sw) * sigma;
}

Telemetry controller_step(const ControllerParams& params, const EffectiveGains& gains,
                          ControllerState& state, double y, double dt,
                          Eigen::Ref<Vector> u) {
  if (!std::isfinite(y)) {
    std::ostringstream os;
    os << "non-finite measured output y = " << y << " at t = " << state.t;
    throw SimulationAbort(state.t, os.str());
  }

  Telemetry tel;
  tel.y_m = state.y_m;
  tel.e = y - state.y_m;
  tel.s = sliding_variable(state, tel.e);
  tel.rho = gains.rho;
  tel.dir_index = cyclic_direction_index(state.t, params.period(), params.n_dirs);
  state.dir_index = tel.dir_index;

  u.setZero();
  u[tel.dir_index - 1] = gains.rho * switching_sign(tel.s, params.epsilon_sw);

  reference_step(state, gains.p_eff, params.y_sat, dt);
  sliding_variable_step(state, tel.e, gains.lambda_eff, dt);
  state.t += dt;
  return tel;
}

ControllerOutput controller_step(const ControllerParams& params,
                                 const EffectiveGains& gains, ControllerState& state,
                                 double y, double dt) {
  ControllerOutput out;
  out.u = Vector::Zero(params.n_dirs);
  out.telemetry = controller_step(params, gains, state, y, dt, out.u);
  return out;
}

}  // namespace esc
