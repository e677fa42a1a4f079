#pragma once

#include "esc/plant.hpp"
#include "esc/sim.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace esc {

struct SlidingSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  long band = 0;  ///< k in s = k * eps

  double duration() const { return t_end - t_start; }
};

/// Maximal runs of samples with |s - k eps| <= band_tol for one fixed k, kept
/// when they last at least min_duration. `t` and `s` are parallel traces.
std::vector<SlidingSegment> detect_sliding(std::span<const double> t,
                                           std::span<const double> s, double epsilon_sw,
                                           double band_tol, double min_duration);

struct Metrics {
  std::optional<double> t_reach_delta;  ///< first time |z - z*| < delta
  double residual_amp = 0.0;            ///< max |y - y*| over the trailing window
  double mean_residual = 0.0;           ///< mean |y - y*| over the trailing window
  std::vector<SlidingSegment> sliding_segments;
  bool bounded = true;                  ///< every logged signal finite

  // Diagnostics beyond the core fields.
  double delta = 0.0;
  double z_residual_amp = 0.0;  ///< max |z - z*| over the trailing window
  double final_y = 0.0;
  Vector final_z;
};

struct MetricsOptions {
  std::optional<double> delta;  ///< default sqrt(epsilon_sw)
  double trailing_fraction = 0.1;
  std::optional<double> band_tol;      ///< default 0.25 eps
  std::optional<double> min_duration;  ///< default 50 dt
};

/// Default vicinity radius sqrt(eps).
inline double default_delta(double epsilon_sw) { return std::sqrt(epsilon_sw); }

Metrics convergence_metrics(const Trajectory& traj, const Vector& z_star, double y_star,
                            double epsilon_sw, double dt,
                            const MetricsOptions& options = {});

struct ResidualCheck {
  bool pass = false;
  double bound = 0.0;             ///< c_bound (sqrt(eta) + eps)
  double implied_constant = 0.0;  ///< residual_amp / (sqrt(eta) + eps)
  std::string reason;
};

/// residual_amp <= c_bound (sqrt(eta) + eps); fails outright for a run that
/// never entered the vicinity.
ResidualCheck residual_bound_check(const Metrics& metrics, double eta, double epsilon_sw,
                                   double c_bound);

/// Central differences of v -> h(steady_state_output(v)), an estimate of the
/// input gain k_p at z = steady_state_output(v) that never touches the
/// analytic gradient or the DC gain matrix.
Vector fd_gradient_oracle(const CascadePlant& plant, const Vector& v,
                          double fd_step = 1e-5);

}  // namespace esc
