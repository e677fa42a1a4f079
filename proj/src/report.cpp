#include "esc/report.hpp"

#include "esc/errors.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace esc {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void put(std::ostream& out, double value) { out << format_number(value); }

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string trajectory_csv_header(Eigen::Index n, Eigen::Index m) {
  std::string h = "t";
  auto cols = [&](const char* prefix, Eigen::Index count) {
    for (Eigen::Index i = 1; i <= count; ++i) h += std::string(",") + prefix + std::to_string(i);
  };
  cols("v", m);
  cols("x", n);
  cols("z", n);
  h += ",y,y_m,e,s";
  cols("u", m);
  h += ",dir,rho";
  return h;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << trajectory_csv_header(traj.state_dim(), traj.input_dim()) << "\n";
  const auto t = traj.t();
  const auto y = traj.y();
  const auto ym = traj.y_m();
  const auto e = traj.e();
  const auto s = traj.s();
  const auto rho = traj.rho();
  const auto dir = traj.dir();
  auto vec = [&](const auto& v) {
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      out << ',';
      put(out, v[j]);
    }
  };
  for (std::size_t i = 0; i < traj.size(); ++i) {
    put(out, t[i]);
    vec(traj.v(i));
    vec(traj.x(i));
    vec(traj.z(i));
    for (double value : {y[i], ym[i], e[i], s[i]}) {
      out << ',';
      put(out, value);
    }
    vec(traj.u(i));
    out << ',' << dir[i] << ',';
    put(out, rho[i]);
    out << '\n';
  }
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_trajectory_csv(traj, out);
}

nlohmann::json metrics_report(const Metrics& m, const std::optional<ResidualCheck>& residual) {
  nlohmann::json j;
  j["t_reach_delta"] = m.t_reach_delta ? nlohmann::json(*m.t_reach_delta) : nlohmann::json(nullptr);
  j["residual_amp"] = m.residual_amp;
  j["mean_residual"] = m.mean_residual;
  j["sliding_segments"] = m.sliding_segments.size();
  j["bounded"] = m.bounded;
  j["delta"] = m.delta;
  j["z_residual_amp"] = m.z_residual_amp;
  j["final_y"] = m.final_y;
  for (Eigen::Index i = 0; i < m.final_z.size(); ++i) {
    j["final_z" + std::to_string(i + 1)] = m.final_z[i];
  }
  if (residual) {
    j["residual_bound"] = residual->bound;
    j["residual_bound_pass"] = residual->pass;
    j["implied_constant"] = residual->implied_constant;
  }
  return j;
}

void write_sliding_segments(const Metrics& m, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "t_start,t_end,band\n";
  for (const auto& seg : m.sliding_segments) {
    put(out, seg.t_start);
    out << ',';
    put(out, seg.t_end);
    out << ',' << seg.band << '\n';
  }
}

void write_plot_files(const Trajectory& traj, const StaticMap& map,
                      const std::filesystem::path& dir, std::size_t max_rows) {
  const std::size_t n_samples = traj.size();
  const std::size_t stride = std::max<std::size_t>(1, (n_samples + max_rows - 1) / max_rows);
  const auto n = traj.state_dim();
  const auto m = traj.input_dim();
  const auto t = traj.t();
  const auto y = traj.y();
  const auto ym = traj.y_m();
  const auto dirs = traj.dir();

  {
    auto out = open_out(dir / "fig_outputs.dat");
    out << "# t";
    for (Eigen::Index i = 1; i <= n; ++i) out << " z" << i;
    out << " y y_m\n";
    for (std::size_t k = 0; k < n_samples; k += stride) {
      put(out, t[k]);
      for (Eigen::Index i = 0; i < n; ++i) out << ' ' << format_number(traj.z(k)[i]);
      out << ' ' << format_number(y[k]) << ' ' << format_number(ym[k]) << '\n';
    }
  }
  {
    auto out = open_out(dir / "fig_control.dat");
    out << "# t";
    for (Eigen::Index i = 1; i <= m; ++i) out << " u" << i;
    for (Eigen::Index i = 1; i <= m; ++i) out << " sigma" << i;
    out << '\n';
    for (std::size_t k = 0; k < n_samples; k += stride) {
      put(out, t[k]);
      for (Eigen::Index i = 0; i < m; ++i) out << ' ' << format_number(traj.u(k)[i]);
      for (Eigen::Index i = 0; i < m; ++i) out << ' ' << (dirs[k] == i + 1 ? 1 : 0);
      out << '\n';
    }
  }
  if (n < 2) return;

  double lo[2] = {traj.z(0)[0], traj.z(0)[1]};
  double hi[2] = {lo[0], lo[1]};
  {
    auto out = open_out(dir / "fig_phase.dat");
    auto path = open_out(dir / "fig_path.dat");
    out << "# z1 z2\n";
    path << "# z1 z2 y\n";
    for (std::size_t k = 0; k < n_samples; k += stride) {
      const auto z = traj.z(k);
      for (int i = 0; i < 2; ++i) {
        lo[i] = std::min(lo[i], z[i]);
        hi[i] = std::max(hi[i], z[i]);
      }
      out << format_number(z[0]) << ' ' << format_number(z[1]) << '\n';
      path << format_number(z[0]) << ' ' << format_number(z[1]) << ' ' << format_number(y[k])
           << '\n';
    }
  }
  if (n == 2) {
    auto out = open_out(dir / "fig_surface.dat");
    out << "# z1 z2 h(z); blank line between z1 slices\n";
    constexpr int kGrid = 41;
    for (int i = 0; i < 2; ++i) {
      const double pad = 0.1 * std::max(1.0, hi[i] - lo[i]);
      lo[i] -= pad;
      hi[i] += pad;
    }
    Vector z(2);
    for (int a = 0; a < kGrid; ++a) {
      z[0] = lo[0] + (hi[0] - lo[0]) * a / (kGrid - 1);
      for (int b = 0; b < kGrid; ++b) {
        z[1] = lo[1] + (hi[1] - lo[1]) * b / (kGrid - 1);
        out << format_number(z[0]) << ' ' << format_number(z[1]) << ' '
            << format_number(map.eval(z)) << '\n';
      }
      out << '\n';
    }
  }

  auto gp = open_out(dir / "plots.gp");
  gp << "# gnuplot plots.gp\n"
        "set terminal pngcairo size 900,600\n"
        "set output 'outputs.png'\n"
        "set xlabel 't'\n"
        "plot 'fig_outputs.dat' u 1:2 w l t 'z1', '' u 1:3 w l t 'z2', "
        "'' u 1:"
     << (n + 2) << " w l t 'y', '' u 1:" << (n + 3)
     << " w l dt 2 t 'y_m'\n"
        "set output 'phase.png'\n"
        "set xlabel 'z1'; set ylabel 'z2'\n"
        "plot 'fig_phase.dat' u 1:2 w l t 'z'\n"
        "set output 'control.png'\n"
        "set xlabel 't'; set ylabel ''\n"
        "plot 'fig_control.dat' u 1:2 w l t 'u1', '' u 1:"
     << (m + 2) << " w steps t 'sigma1'\n";
  if (n == 2) {
    gp << "set output 'surface.png'\n"
          "set xlabel 'z1'; set ylabel 'z2'; set zlabel 'y'\n"
          "splot 'fig_surface.dat' u 1:2:3 w l lc rgb '#bbbbbb' t 'h(z)', "
          "'fig_path.dat' u 1:2:3 w l lw 2 t 'output path'\n";
  }
}

}  // namespace esc
