#pragma once

#include "esc/controller.hpp"
#include "esc/plant.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace esc {

struct SimConfig {
  double dt = 1e-3;
  double horizon = 1500.0;
  Vector x0;           ///< initial LTI state
  Vector v0;           ///< initial integrator state; empty means zero
  bool quasi_steady = false;  ///< start at v0 = -B^+ A x0 instead of v0
  int log_stride = 1;  ///< record every k-th step
  bool dt_guard = true;
  bool allow_unstable = false;  ///< run even if a checkable hypothesis fails

  std::size_t steps() const;
  void validate() const;
};

/// Time-indexed log of the closed loop, stored column-wise.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(Eigen::Index state_dim, Eigen::Index input_dim);

  Eigen::Index state_dim() const noexcept { return n_; }
  Eigen::Index input_dim() const noexcept { return m_; }
  std::size_t size() const noexcept { return t_.size(); }
  bool empty() const noexcept { return t_.empty(); }

  void reserve(std::size_t samples);
  void append(double t, const Vector& v, const Vector& x, const Vector& z, double y,
              double y_m, double e, double s, const Vector& u, int dir, double rho);

  std::span<const double> t() const noexcept { return t_; }
  std::span<const double> y() const noexcept { return y_; }
  std::span<const double> y_m() const noexcept { return y_m_; }
  std::span<const double> e() const noexcept { return e_; }
  std::span<const double> s() const noexcept { return s_; }
  std::span<const double> rho() const noexcept { return rho_; }
  std::span<const int> dir() const noexcept { return dir_; }

  Eigen::Map<const Vector> v(std::size_t i) const { return row(v_, i, m_); }
  Eigen::Map<const Vector> x(std::size_t i) const { return row(x_, i, n_); }
  Eigen::Map<const Vector> z(std::size_t i) const { return row(z_, i, n_); }
  Eigen::Map<const Vector> u(std::size_t i) const { return row(u_, i, m_); }

  bool all_finite() const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  static Eigen::Map<const Vector> row(const std::vector<double>& data, std::size_t i,
                                      Eigen::Index width) {
    return Eigen::Map<const Vector>(data.data() + i * width, width);
  }

  Eigen::Index n_ = 0;
  Eigen::Index m_ = 0;
  std::vector<double> t_, v_, x_, z_, y_, y_m_, e_, s_, u_, rho_;
  std::vector<int> dir_;
};

/// What one closed-loop step measured and emitted.
struct StepRecord {
  double y = 0.0;
  Telemetry telemetry;
};

/// Plant and controller wired together; owns all mutable loop state.
class ClosedLoop {
 public:
  ClosedLoop(CascadePlant plant, ControllerParams params);

  const CascadePlant& plant() const noexcept { return plant_; }
  const ControllerParams& params() const noexcept { return params_; }
  const EffectiveGains& gains() const noexcept { return gains_; }
  const ControllerState& state() const noexcept { return state_; }
  ControllerState& state() noexcept { return state_; }
  const Vector& last_input() const noexcept { return u_; }

  void set_plant_state(Vector v, Vector x) { plant_.set_state(std::move(v), std::move(x)); }

  /// Measure y = h(Cx), compute u, then advance (v, x) by one Euler step with
  /// u held over dt. Throws SimulationAbort if the new state is not finite.
  StepRecord step(double dt);

 private:
  CascadePlant plant_;
  ControllerParams params_;
  EffectiveGains gains_;
  ControllerState state_;
  Vector u_;
};

struct DtGuard {
  double gain_bound = 0.0;       ///< max |k_p| over the state box
  double switching_limit = 0.0;  ///< eps / (rho * gain_bound)
  double plant_limit = 0.0;      ///< mu / |A|_2
  double bound() const { return std::min(switching_limit, plant_limit); }
};

/// Step-size limits: the band eps must not be crossed in one step at the
/// largest input gain on the box centred on z* (or z0 without a known
/// optimum) with half-width max(1, |z0 - centre|_inf), and the linear block
/// must be resolved.
DtGuard compute_dt_guard(const CascadePlant& plant, const ControllerParams& params,
                         const Vector& z0);

/// Integrator state that puts the linear block at rest at x0 (least squares
/// when B is not square). Throws ConfigError when A x0 is outside range(B).
Vector quasi_steady_input(const LtiSubsystem& lti, const Vector& x0);

/// Fixed-step closed-loop simulation over [0, horizon]. Deterministic.
/// Throws ConfigError on failed hypotheses or dt guard (unless overridden) and
/// SimulationAbort on non-finite signals.
Trajectory run(const CascadePlant& plant, const ControllerParams& params,
               const SimConfig& config);

}  // namespace esc
