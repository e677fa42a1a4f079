#include "esc/analysis.hpp"

#include "esc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace esc {

std::vector<SlidingSegment> detect_sliding(std::span<const double> t,
                                           std::span<const double> s, double epsilon_sw,
                                           double band_tol, double min_duration) {
  std::vector<SlidingSegment> out;
  const std::size_t n = std::min(t.size(), s.size());
  if (n == 0) return out;

  auto band_of = [&](double value, long& band) {
    const double k = std::nearbyint(value / epsilon_sw);
    band = static_cast<long>(k);
    return std::abs(value - k * epsilon_sw) <= band_tol;
  };

  bool open = false;
  SlidingSegment cur;
  auto close = [&](std::size_t last) {
    cur.t_end = t[last];
    if (cur.duration() >= min_duration) out.push_back(cur);
    open = false;
  };

  for (std::size_t i = 0; i < n; ++i) {
    long band = 0;
    const bool in_band = std::isfinite(s[i]) && band_of(s[i], band);
    if (open && (!in_band || band != cur.band)) close(i - 1);
    if (in_band && !open) {
      cur = SlidingSegment{t[i], t[i], band};
      open = true;
    }
  }
  if (open) close(n - 1);
  return out;
}

Metrics convergence_metrics(const Trajectory& traj, const Vector& z_star, double y_star,
                            double epsilon_sw, double dt, const MetricsOptions& options) {
  if (traj.empty()) throw ConfigError("trajectory", "empty trajectory");
  if (!(options.trailing_fraction > 0.0 && options.trailing_fraction <= 1.0)) {
    throw ConfigError("analysis.trailing_fraction", "must lie in (0, 1]");
  }
  if (z_star.size() != traj.state_dim()) {
    throw ConfigError("plant.map.z_star", "dimension mismatch with trajectory");
  }

  Metrics m;
  m.delta = options.delta.value_or(default_delta(epsilon_sw));
  m.bounded = traj.all_finite();

  const std::size_t n = traj.size();
  const auto times = traj.t();
  const auto ys = traj.y();
  for (std::size_t i = 0; i < n; ++i) {
    if ((traj.z(i) - z_star).norm() < m.delta) {
      m.t_reach_delta = times[i];
      break;
    }
  }

  const auto window = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(options.trailing_fraction * n)));
  double sum = 0.0;
  for (std::size_t i = n - window; i < n; ++i) {
    const double r = std::abs(ys[i] - y_star);
    m.residual_amp = std::max(m.residual_amp, r);
    sum += r;
    m.z_residual_amp = std::max(m.z_residual_amp, (traj.z(i) - z_star).norm());
  }
  m.mean_residual = sum / static_cast<double>(window);
  m.final_y = ys[n - 1];
  m.final_z = traj.z(n - 1);

  m.sliding_segments =
      detect_sliding(times, traj.s(), epsilon_sw, options.band_tol.value_or(0.25 * epsilon_sw),
                     options.min_duration.value_or(50.0 * dt));
  return m;
}

ResidualCheck residual_bound_check(const Metrics& metrics, double eta, double epsilon_sw,
                                   double c_bound) {
  ResidualCheck r;
  const double scale = std::sqrt(eta) + epsilon_sw;
  r.bound = c_bound * scale;
  r.implied_constant = metrics.residual_amp / scale;
  if (!metrics.t_reach_delta) {
    r.reason = "run never entered the delta-vicinity";
    return r;
  }
  if (!metrics.bounded) {
    r.reason = "non-finite signals";
    return r;
  }
  r.pass = metrics.residual_amp <= r.bound;
  if (!r.pass) r.reason = "residual amplitude exceeds bound";
  return r;
}

Vector fd_gradient_oracle(const CascadePlant& plant, const Vector& v, double fd_step) {
  const auto& lti = plant.lti();
  const auto& map = plant.map();
  return central_difference(
      [&](const Vector& w) { return map.eval(lti.steady_state_output(w)); }, v, fd_step);
}

}  // namespace esc
