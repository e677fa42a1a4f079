#pragma once

#include "esc/analysis.hpp"
#include "esc/sim.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace esc {

/// Header row: t, v1..vm, x1..xn, z1..zn, y, y_m, e, s, u1..um, dir, rho.
std::string trajectory_csv_header(Eigen::Index state_dim, Eigen::Index input_dim);

/// One row per sample, numbers with 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

/// Flat report keyed by the Metrics field names; sliding_segments is the count.
nlohmann::json metrics_report(const Metrics& metrics,
                              const std::optional<ResidualCheck>& residual = std::nullopt);

void write_sliding_segments(const Metrics& metrics, const std::filesystem::path& path);

/// Plot-ready data and a gnuplot script:
///   fig_outputs.dat  t, z, y, y_m
///   fig_phase.dat    z1, z2
///   fig_control.dat  t, u, sigma
///   fig_surface.dat  z1, z2, h(z) grid (n = 2 only), fig_path.dat z1, z2, y
///   plots.gp
void write_plot_files(const Trajectory& traj, const StaticMap& map,
                      const std::filesystem::path& dir, std::size_t max_rows = 20000);

/// Shortest-round-trip-safe rendering (17 significant digits).
std::string format_number(double value);

}  // namespace esc
