// Command-line front end: run a scenario, run the verification suites, or
// sweep one parameter.

#include "esc/errors.hpp"
#include "esc/report.hpp"
#include "esc/runner.hpp"
#include "esc/scenario.hpp"
#include "esc/verify.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kIoError = 3,
  kConfigError = 4,
  kSimulationAbort = 5,
};

fs::path default_out_dir() {
  if (const char* env = std::getenv("ESC_OUT_DIR"); env && *env) return env;
  return "esc_out";
}

fs::path default_scenario_dir() {
  if (const char* env = std::getenv("ESC_SCENARIO_DIR"); env && *env) return env;
  return ESC_DEFAULT_SCENARIO_DIR;
}

struct CommonOptions {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  bool allow_unstable = false;
  std::string dt_guard = "on";
  bool dt_auto = false;
};

esc::LoadOptions load_options(const CommonOptions& o) {
  esc::LoadOptions lo;
  lo.overrides = o.overrides;
  lo.allow_unstable = o.allow_unstable;
  if (o.dt_guard == "off") lo.dt_guard = false;
  return lo;
}

void apply_dt_auto(esc::Scenario& sc) {
  const double dt = esc::guarded_dt(sc);
  if (dt < sc.sim.dt) {
    sc.sim.log_stride = std::max(1, static_cast<int>(std::lround(sc.sim.log_stride * sc.sim.dt / dt)));
    sc.sim.dt = dt;
  }
}

void write_outputs(const esc::Scenario& sc, const esc::RunOutcome& run, const fs::path& dir) {
  fs::create_directories(dir);
  esc::write_trajectory_csv(run.trajectory, dir / "trajectory.csv");
  save_scenario(sc, dir / "scenario.json");
  if (run.metrics) {
    std::ofstream(dir / "metrics.json") << esc::metrics_report(*run.metrics, run.residual).dump(2)
                                        << "\n";
    esc::write_sliding_segments(*run.metrics, dir / "sliding_segments.csv");
  }
  esc::write_plot_files(run.trajectory, sc.plant.map.build(), dir);
}

// Translate library exceptions into exit codes with a one-line message.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const esc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const esc::SimulationAbort& e) {
    std::cerr << "simulation aborted: " << e.what() << "\n";
    return kSimulationAbort;
  } catch (const esc::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSimulationAbort;
  }
}

int cmd_run(const CommonOptions& o) {
  return guarded([&] {
    if (!fs::exists(o.config)) {
      std::cerr << "I/O error: scenario file not found: " << o.config << "\n";
      return static_cast<int>(kIoError);
    }
    esc::Scenario sc = esc::load_scenario(o.config, load_options(o));
    if (o.dt_auto) apply_dt_auto(sc);
    const fs::path out = o.out.empty() ? default_out_dir() : fs::path(o.out);

    const auto report = esc::check_hypotheses(esc::build_plant(sc), sc.controller.L_h,
                                              sc.analysis.delta.value_or(
                                                  esc::default_delta(sc.controller.epsilon_sw)));
    for (const auto& c : report.checks) {
      std::cout << "  " << c.id << " " << esc::to_string(c.status) << ": " << c.detail << "\n";
    }

    const esc::RunOutcome run = esc::run_scenario(sc);
    write_outputs(sc, run, out);
    std::cout << "scenario " << sc.name << ": " << run.trajectory.size() << " samples, "
              << run.seconds << " s -> " << out.string() << "\n";
    if (run.metrics) std::cout << esc::metrics_report(*run.metrics, run.residual).dump(2) << "\n";
    return static_cast<int>(kOk);
  });
}

int cmd_verify(const std::string& suite, const std::string& scenario_dir) {
  return guarded([&] {
    const fs::path dir = scenario_dir.empty() ? default_scenario_dir() : fs::path(scenario_dir);
    std::vector<esc::verify::CheckResult> results;
    auto add = [&](std::vector<esc::verify::CheckResult> more) {
      results.insert(results.end(), more.begin(), more.end());
    };
    if (suite == "oracles" || suite == "all") add(esc::verify::oracle_suite());
    if (suite == "scenarios" || suite == "all") add(esc::verify::scenario_suite(dir));
    if (suite == "sweep" || suite == "all") add(esc::verify::sweep_suite(dir));
    const bool ok = esc::verify::print_table(results, std::cout);
    if (!ok) {
      std::cout << "failed:";
      for (const auto& r : results) {
        if (!r.passed) std::cout << " " << r.id;
      }
      std::cout << "\n";
    }
    return static_cast<int>(ok ? kOk : kCheckFailed);
  });
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument(item);
    out.push_back(v);
  }
  return out;
}

int cmd_sweep(const CommonOptions& o, const std::string& param, const std::string& values_text) {
  const auto field = esc::resolve_numeric_field(param);
  if (!field) {
    std::cerr << "usage error: unknown or ambiguous numeric parameter \"" << param << "\"\n";
    return kUsage;
  }
  std::vector<double> values;
  try {
    values = parse_values(values_text);
  } catch (const std::exception&) {
    std::cerr << "usage error: --values must be a comma-separated list of numbers\n";
    return kUsage;
  }
  if (values.empty()) {
    std::cerr << "usage error: --values is empty\n";
    return kUsage;
  }

  return guarded([&] {
    if (!fs::exists(o.config)) {
      std::cerr << "I/O error: scenario file not found: " << o.config << "\n";
      return static_cast<int>(kIoError);
    }
    const fs::path out = o.out.empty() ? default_out_dir() : fs::path(o.out);
    fs::create_directories(out);

    struct Row {
      double value = 0.0;
      double dt = 0.0;
      std::string status = "ok";
      esc::RunOutcome run;
    };
    std::vector<std::future<Row>> jobs;
    for (double value : values) {
      jobs.push_back(std::async(std::launch::async, [&, value] {
        Row row{value};
        try {
          esc::LoadOptions lo = load_options(o);
          lo.overrides.push_back(*field + "=" + esc::format_number(value));
          esc::Scenario sc = esc::load_scenario(o.config, lo);
          if (o.dt_auto) apply_dt_auto(sc);
          row.dt = sc.sim.dt;
          row.run = esc::run_scenario(sc);
          write_outputs(sc, row.run, out / (*field + "=" + esc::format_number(value)));
        } catch (const std::exception& e) {
          row.status = std::string("error: ") + e.what();
        }
        return row;
      }));
    }

    std::ofstream table(out / "sweep.csv");
    table << "param,value,status,dt,t_reach_delta,residual_amp,mean_residual,sliding_segments,"
             "bounded,implied_constant,residual_bound_pass\n";
    bool all_ok = true;
    for (auto& job : jobs) {
      const Row row = job.get();
      std::string status = row.status;
      for (char& c : status) {
        if (c == ',' || c == '\n') c = ';';
      }
      table << *field << ',' << esc::format_number(row.value) << ',' << status << ','
            << esc::format_number(row.dt);
      if (row.status == "ok" && row.run.metrics) {
        const auto& m = *row.run.metrics;
        table << ',' << (m.t_reach_delta ? esc::format_number(*m.t_reach_delta) : "") << ','
              << esc::format_number(m.residual_amp) << ',' << esc::format_number(m.mean_residual)
              << ',' << m.sliding_segments.size() << ',' << (m.bounded ? "true" : "false") << ','
              << esc::format_number(row.run.residual->implied_constant) << ','
              << (row.run.residual->pass ? "true" : "false");
      } else {
        table << ",,,,,,,";
      }
      table << '\n';
      all_ok = all_ok && row.status == "ok";
      std::cout << *field << "=" << row.value << ": " << row.status;
      if (row.status == "ok" && row.run.metrics) {
        std::cout << ", residual_amp " << row.run.metrics->residual_amp;
      }
      std::cout << "\n";
    }
    std::cout << "wrote " << (out / "sweep.csv").string() << "\n";
    return static_cast<int>(all_ok ? kOk : kSimulationAbort);
  });
}

void add_common(CLI::App* cmd, CommonOptions& o, bool require_config) {
  auto* cfg = cmd->add_option("--config", o.config, "Scenario file");
  if (require_config) cfg->required();
  cmd->add_option("--out", o.out, "Output directory (default $ESC_OUT_DIR or ./esc_out)");
  cmd->add_option("--override", o.overrides, "key=value, dot-path into the scenario");
  cmd->add_flag("--allow-unstable", o.allow_unstable,
                "Run even when H3/H4 fail (logged as a warning)");
  cmd->add_option("--dt-guard", o.dt_guard, "Step-size guard: on|off")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_flag("--dt-auto", o.dt_auto, "Reduce dt to half the guard bound when needed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extremum seeking control via sliding modes and cyclic search"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write trajectory, metrics and plot data");
  add_common(run, run_opts, true);

  std::string suite = "all";
  std::string scenario_dir;
  auto* verify = app.add_subcommand("verify", "Run the verification suites");
  verify->add_option("suite", suite, "oracles|scenarios|sweep|all")
      ->check(CLI::IsMember({"oracles", "scenarios", "sweep", "all"}));
  verify->add_option("--scenarios", scenario_dir,
                     "Directory of shipped scenarios (default $ESC_SCENARIO_DIR or the source tree)");

  CommonOptions sweep_opts;
  std::string param;
  std::string values;
  auto* sweep = app.add_subcommand("sweep", "Run one scenario per value of a numeric parameter");
  add_common(sweep, sweep_opts, true);
  sweep->add_option("--param", param, "Parameter name or dot-path (e.g. eta)")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*run) return cmd_run(run_opts);
  if (*verify) return cmd_verify(suite, scenario_dir);
  if (*sweep) return cmd_sweep(sweep_opts, param, values);
  return kUsage;
}
