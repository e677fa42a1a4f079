#include "esc/errors.hpp"
#include "esc/report.hpp"
#include "esc/runner.hpp"
#include "esc/scenario.hpp"
#include "esc/verify.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kScenarios = ESC_SCENARIO_DIR;

json example_doc() {
  std::ifstream in(kScenarios / "paper_example.cfg");
  return json::parse(in, nullptr, true, true);
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("esc_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("shipped two-input example loads with its documented parameters") {
  const auto sc = esc::load_scenario(kScenarios / "paper_example.cfg");
  esc::Matrix A(2, 2);
  A << 0, 1, -4, -2;
  CHECK(sc.plant.A == A);
  CHECK(sc.plant.B == esc::Matrix::Identity(2, 2));
  CHECK(sc.plant.C == esc::Matrix::Identity(2, 2));
  CHECK(sc.plant.map.y_star == 2.0);
  CHECK(sc.plant.map.z_star.isZero());
  CHECK(sc.plant.map.coupling == 0.5);
  const auto& c = sc.controller;
  CHECK(c.p == 1.0);
  CHECK(c.p0 == 0.0);
  CHECK(c.L_h == 0.1);
  CHECK(c.lambda == 4.0);
  CHECK(c.epsilon_sw == 0.02);
  CHECK(c.gamma == 0.1);
  CHECK(c.eta == 0.01);
  CHECK(c.T_s == 5.0);
  CHECK(c.scaling_mode == esc::ScalingMode::kScaled);
  CHECK(sc.sim.dt == 1e-3);
  CHECK(sc.sim.horizon == 1500.0);
  CHECK(sc.sim.x0 == esc::Vector{{-2.0, 4.0}});
}

TEST_CASE("validation errors name the offending field") {
  auto doc = example_doc();
  doc["controller"]["T_s"] = -1;
  try {
    esc::scenario_from_json(doc);
    FAIL("negative T_s accepted");
  } catch (const esc::ConfigError& e) {
    CHECK(e.field() == "controller.T_s");
  }

  doc = example_doc();
  doc["sim"]["x0"] = {1, 2, 3};
  CHECK_THROWS_WITH_AS(esc::scenario_from_json(doc), doctest::Contains("sim.x0"), esc::ConfigError);

  doc = example_doc();
  doc["plant"]["map"]["coupling"] = 1.0;
  CHECK_THROWS_AS(esc::scenario_from_json(doc), esc::ConfigError);

  doc = example_doc();
  doc["plant"].erase("A");
  CHECK_THROWS_WITH_AS(esc::scenario_from_json(doc), doctest::Contains("plant.A"), esc::ConfigError);

  doc = example_doc();
  doc["controller"]["eta"] = "fast";
  CHECK_THROWS_WITH_AS(esc::scenario_from_json(doc), doctest::Contains("controller.eta"),
                       esc::ConfigError);
}

TEST_CASE("unstable A is rejected unless explicitly allowed") {
  auto doc = example_doc();
  doc["plant"]["A"] = {{1, 0}, {0, 1}};
  CHECK_THROWS_WITH_AS(esc::scenario_from_json(doc), doctest::Contains("left-half plane"),
                       esc::ConfigError);
  esc::LoadOptions opts;
  opts.allow_unstable = true;
  CHECK_NOTHROW(esc::scenario_from_json(doc, opts));
}

TEST_CASE("missing and malformed files") {
  CHECK_THROWS_WITH_AS(esc::load_scenario("/nonexistent/x.cfg"), doctest::Contains("/nonexistent/x.cfg"),
                       esc::IoError);
  const auto dir = temp_dir("malformed");
  std::ofstream(dir / "bad.cfg") << "{ \"plant\": [1, 2";
  CHECK_THROWS_AS(esc::load_scenario(dir / "bad.cfg"), esc::ConfigError);
}

TEST_CASE("overrides by dot-path and by unique leaf name") {
  esc::LoadOptions opts;
  opts.overrides = {"dt=5e-4", "controller.eta=0.04", "sim.x0=[0,5]", "scaling_mode=unscaled"};
  const auto sc = esc::load_scenario(kScenarios / "paper_example.cfg", opts);
  CHECK(sc.sim.dt == 5e-4);
  CHECK(sc.controller.eta == 0.04);
  CHECK(sc.sim.x0 == esc::Vector{{0.0, 5.0}});
  CHECK(sc.controller.scaling_mode == esc::ScalingMode::kUnscaled);

  opts.overrides = {"no_such_field=1"};
  CHECK_THROWS_AS(esc::load_scenario(kScenarios / "paper_example.cfg", opts), esc::ConfigError);
  opts.overrides = {"missing_equals"};
  CHECK_THROWS_AS(esc::load_scenario(kScenarios / "paper_example.cfg", opts), esc::ConfigError);

  CHECK(esc::resolve_numeric_field("eta") == "controller.eta");
  CHECK(esc::resolve_numeric_field("sim.dt") == "sim.dt");
  CHECK_FALSE(esc::resolve_numeric_field("bogus"));
}

TEST_CASE("every shipped scenario round-trips through serialization") {
  const auto dir = temp_dir("roundtrip");
  for (const auto& path : esc::verify::shipped_scenarios(kScenarios)) {
    CAPTURE(path);
    const auto sc = esc::load_scenario(path);
    esc::save_scenario(sc, dir / path.filename());
    CHECK(esc::load_scenario(dir / path.filename()) == sc);
    CHECK(esc::scenario_from_json(esc::to_json(sc)) == sc);
  }
}

TEST_CASE("trajectory CSV layout") {
  CHECK(esc::trajectory_csv_header(2, 2) ==
        "t,v1,v2,x1,x2,z1,z2,y,y_m,e,s,u1,u2,dir,rho");

  esc::LoadOptions opts;
  opts.overrides = {"horizon=2"};
  const auto sc = esc::load_scenario(kScenarios / "paper_example.cfg", opts);
  const auto run = esc::run_scenario(sc);
  std::ostringstream csv;
  esc::write_trajectory_csv(run.trajectory, csv);

  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == esc::trajectory_csv_header(2, 2));
  std::size_t rows = 0;
  double prev_t = -1;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 14);
    const double t = std::stod(line.substr(0, line.find(',')));
    CHECK(t > prev_t);
    prev_t = t;
    ++rows;
  }
  CHECK(rows == run.trajectory.size());
}

TEST_CASE("numbers print with 17 significant digits and round-trip") {
  for (double x : {0.1, 1.0 / 3.0, -26.0, 1e-300, 6.02214076e23}) {
    CHECK(std::stod(esc::format_number(x)) == x);
  }
  CHECK(esc::format_number(0.1) == "0.10000000000000001");
}

TEST_CASE("metrics report uses the metric names verbatim") {
  esc::Metrics m;
  m.t_reach_delta = 3.5;
  m.residual_amp = 0.2;
  m.mean_residual = 0.1;
  m.final_z = esc::Vector::Zero(2);
  const auto report = esc::metrics_report(m);
  for (const char* key : {"t_reach_delta", "residual_amp", "mean_residual", "sliding_segments", "bounded"}) {
    CHECK(report.contains(key));
  }
  CHECK(report["t_reach_delta"] == 3.5);
}
