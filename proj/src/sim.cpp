#include "esc/sim.hpp"

#include "esc/errors.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

namespace esc {

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("sim.dt", "must be positive");
  if (!(horizon > dt) || !std::isfinite(horizon)) {
    throw ConfigError("sim.horizon", "must be finite and greater than sim.dt");
  }
  if (log_stride < 1) throw ConfigError("sim.log_stride", "must be at least 1");
  if (x0.size() == 0) throw ConfigError("sim.x0", "must be given");
  if (!x0.allFinite()) throw ConfigError("sim.x0", "non-finite entry");
  if (v0.size() != 0 && !v0.allFinite()) throw ConfigError("sim.v0", "non-finite entry");
}

// ---------------------------------------------------------------------------

Trajectory::Trajectory(Eigen::Index state_dim, Eigen::Index input_dim)
    : n_(state_dim), m_(input_dim) {}

void Trajectory::reserve(std::size_t samples) {
  t_.reserve(samples);
  y_.reserve(samples);
  y_m_.reserve(samples);
  e_.reserve(samples);
  s_.reserve(samples);
  rho_.reserve(samples);
  dir_.reserve(samples);
  v_.reserve(samples * m_);
  u_.reserve(samples * m_);
  x_.reserve(samples * n_);
  z_.reserve(samples * n_);
}

void Trajectory::append(double t, const Vector& v, const Vector& x, const Vector& z,
                        double y, double y_m, double e, double s, const Vector& u,
                        int dir, double rho) {
  t_.push_back(t);
  v_.insert(v_.end(), v.data(), v.data() + v.size());
  x_.insert(x_.end(), x.data(), x.data() + x.size());
  z_.insert(z_.end(), z.data(), z.data() + z.size());
  y_.push_back(y);
  y_m_.push_back(y_m);
  e_.push_back(e);
  s_.push_back(s);
  u_.insert(u_.end(), u.data(), u.data() + u.size());
  dir_.push_back(dir);
  rho_.push_back(rho);
}

bool Trajectory::all_finite() const {
  for (const auto* col : {&t_, &v_, &x_, &z_, &y_, &y_m_, &e_, &s_, &u_, &rho_}) {
    for (double value : *col) {
      if (!std::isfinite(value)) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

ClosedLoop::ClosedLoop(CascadePlant plant, ControllerParams params)
    : plant_(std::move(plant)), params_(std::move(params)) {
  params_.validate();
  if (params_.n_dirs != plant_.lti().input_dim()) {
    throw ConfigError("controller.n_dirs",
                      "must equal the number of plant inputs (" +
                          std::to_string(plant_.lti().input_dim()) + ")");
  }
  gains_ = effective_gains(params_);
  state_ = initial_state(params_);
  u_ = Vector::Zero(params_.n_dirs);
}

StepRecord ClosedLoop::step(double dt) {
  StepRecord rec;
  rec.y = plant_.y();
  rec.telemetry = controller_step(params_, gains_, state_, rec.y, dt, u_);
  plant_.advance(u_, dt);
  if (!plant_.x().allFinite() || !plant_.v().allFinite()) {
    std::ostringstream os;
    os << "non-finite plant state at t = " << state_.t
       << " (finite-time escape or unstable integration)";
    throw SimulationAbort(state_.t, os.str());
  }
  return rec;
}

// ---------------------------------------------------------------------------

DtGuard compute_dt_guard(const CascadePlant& plant, const ControllerParams& params,
                         const Vector& z0) {
  const auto n = plant.lti().state_dim();
  const auto& opt = plant.map().optimum();
  const Vector centre = opt ? opt->z_star : z0;
  const double half_width = std::max(1.0, (z0 - centre).cwiseAbs().maxCoeff());

  DtGuard guard;
  auto visit = [&](const Vector& z) {
    guard.gain_bound = std::max(guard.gain_bound, plant.high_freq_gain(z).norm());
  };
  visit(centre);
  visit(z0);
  if (n <= 12) {
    const long corners = 1L << n;
    Vector z(n);
    for (long mask = 0; mask < corners; ++mask) {
      for (Eigen::Index i = 0; i < n; ++i) {
        z[i] = centre[i] + ((mask >> i) & 1 ? half_width : -half_width);
      }
      visit(z);
    }
  }

  const double rho = effective_gains(params).rho;
  guard.switching_limit = guard.gain_bound > 0.0
                              ? params.epsilon_sw / (rho * guard.gain_bound)
                              : std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Matrix> svd(plant.lti().A());
  guard.plant_limit = plant.lti().time_scale() / svd.singularValues()(0);
  return guard;
}

Vector quasi_steady_input(const LtiSubsystem& lti, const Vector& x0) {
  const Vector rhs = -(lti.A() * x0);
  const Vector v = lti.B().completeOrthogonalDecomposition().solve(rhs);
  const double residual = (lti.A() * x0 + lti.B() * v).norm();
  if (residual > 1e-9 * (1.0 + rhs.norm())) {
    throw ConfigError("sim.quasi_steady",
                      "A x0 is not in the range of B; no integrator state holds "
                      "x0 at rest");
  }
  return v;
}

Trajectory run(const CascadePlant& plant_in, const ControllerParams& params,
               const SimConfig& config) {
  config.validate();
  const auto& lti = plant_in.lti();

  if (config.x0.size() != lti.state_dim()) {
    throw ConfigError("sim.x0", "expected dimension " + std::to_string(lti.state_dim()));
  }
  Vector v0;
  if (config.quasi_steady) {
    v0 = quasi_steady_input(lti, config.x0);
  } else if (config.v0.size() == 0) {
    v0 = Vector::Zero(lti.input_dim());
  } else {
    v0 = config.v0;
  }

  CascadePlant plant = plant_in;
  plant.set_state(v0, config.x0);
  ClosedLoop loop(std::move(plant), params);

  const HypothesisReport hyp = check_hypotheses(loop.plant(), params.L_h);
  if (!hyp.ok()) {
    std::ostringstream os;
    for (const auto& c : hyp.checks) {
      if (c.status == HypothesisCheck::Status::kFail) os << c.id << " failed (" << c.detail << ") ";
    }
    if (!config.allow_unstable) throw ConfigError("plant", os.str());
    std::cerr << "WARNING: hypothesis check overridden: " << os.str() << "\n";
  }

  if (config.dt_guard) {
    const DtGuard guard = compute_dt_guard(loop.plant(), params, loop.plant().z());
    if (config.dt > guard.bound()) {
      std::ostringstream os;
      os << "dt = " << config.dt << " exceeds the step guard " << guard.bound()
         << " (switching limit " << guard.switching_limit << ", plant limit "
         << guard.plant_limit << "); reduce sim.dt or disable the guard";
      throw ConfigError("sim.dt", os.str());
    }
  }

  const std::size_t steps = config.steps();
  const auto stride = static_cast<std::size_t>(config.log_stride);
  Trajectory traj(lti.state_dim(), lti.input_dim());
  traj.reserve(steps / stride + 1);

  Vector z(lti.state_dim());
  Vector v(lti.input_dim());
  Vector x(lti.state_dim());
  const double dt = config.dt;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    loop.state().t = t;
    if (k % stride == 0) {
      v = loop.plant().v();
      x = loop.plant().x();
    }
    StepRecord rec;
    if (k < steps) {
      rec = loop.step(dt);
    } else {
      // Final sample: measure and evaluate the law, no integration.
      ControllerState scratch = loop.state();
      rec.y = loop.plant().y();
      Vector u(lti.input_dim());
      rec.telemetry = controller_step(loop.params(), loop.gains(), scratch, rec.y, dt, u);
      if (k % stride == 0) {
        z.noalias() = lti.C() * x;
        traj.append(t, v, x, z, rec.y, rec.telemetry.y_m, rec.telemetry.e,
                    rec.telemetry.s, u, rec.telemetry.dir_index, rec.telemetry.rho);
      }
      break;
    }
    if (k % stride == 0) {
      z.noalias() = lti.C() * x;
      traj.append(t, v, x, z, rec.y, rec.telemetry.y_m, rec.telemetry.e, rec.telemetry.s,
                  loop.last_input(), rec.telemetry.dir_index, rec.telemetry.rho);
    }
  }
  return traj;
}

}  // namespace esc
