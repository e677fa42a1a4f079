// Drives the built `esc` executable end to end.

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = ESC_CLI_PATH;
const fs::path kScenarios = ESC_SCENARIO_DIR;

struct Result {
  int code = -1;
  std::string output;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("esc_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Result esc_cli(const std::string& args, const std::string& env = "") {
  const fs::path log = fs::temp_directory_path() / "esc_cli_last.log";
  const std::string cmd = env + " \"" + kCli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string example_config() { return "--config \"" + (kScenarios / "paper_example.cfg").string() + "\""; }

}  // namespace

TEST_CASE("run writes the documented outputs") {
  const auto out = scratch("run");
  const auto r = esc_cli("run " + example_config() + " --override horizon=5 --out " + out.string());
  INFO(r.output);
  REQUIRE(r.code == 0);
  for (const char* f : {"trajectory.csv", "metrics.json", "sliding_segments.csv", "scenario.json",
                        "fig_outputs.dat", "fig_phase.dat", "fig_control.dat", "fig_surface.dat",
                        "fig_path.dat", "plots.gp"}) {
    CHECK_MESSAGE(fs::exists(out / f), f);
  }
  std::ifstream csv(out / "trajectory.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,v1,v2,x1,x2,z1,z2,y,y_m,e,s,u1,u2,dir,rho");
}

TEST_CASE("run is byte-for-byte reproducible") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  REQUIRE(esc_cli("run " + example_config() + " --override horizon=20 --out " + a.string()).code == 0);
  REQUIRE(esc_cli("run " + example_config() + " --override horizon=20 --out " + b.string()).code == 0);
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
}

TEST_CASE("overrides, env default output directory, and dt guard flag") {
  const auto out = scratch("env");
  auto r = esc_cli("run " + example_config() + " --override horizon=2 --override dt=5e-4",
                   "ESC_OUT_DIR=" + out.string());
  INFO(r.output);
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "trajectory.csv"));

  r = esc_cli("run " + example_config() + " --override horizon=2 --override dt=0.2 --out " + out.string());
  CHECK(r.code == 4);
  r = esc_cli("run " + example_config() + " --override horizon=2 --override dt=0.2 --dt-guard off --out " +
              out.string());
  CHECK(r.code == 0);
}

TEST_CASE("error exit codes") {
  auto r = esc_cli("run --config /nonexistent/scenario.cfg");
  CHECK(r.code == 3);
  CHECK(r.output.find("/nonexistent/scenario.cfg") != std::string::npos);

  r = esc_cli("run " + example_config() + " --override controller.T_s=-1");
  CHECK(r.code == 4);
  CHECK(r.output.find("controller.T_s") != std::string::npos);

  r = esc_cli("run " + example_config() + " --override plant.A=[[1,0],[0,1]]");
  CHECK(r.code == 4);
  CHECK(r.output.find("left-half plane") != std::string::npos);

  CHECK(esc_cli("").code == 2);
  CHECK(esc_cli("run").code == 2);
  CHECK(esc_cli("frobnicate").code == 2);
  CHECK(esc_cli("verify nonsense").code == 2);
}

TEST_CASE("sweep") {
  const auto out = scratch("sweep");
  auto r = esc_cli("sweep " + example_config() + " --param eta --values 0.01,0.04,0.09 --override horizon=5 --dt-auto --out " +
                   out.string());
  INFO(r.output);
  REQUIRE(r.code == 0);
  std::ifstream table(out / "sweep.csv");
  std::string line;
  int rows = -1;
  while (std::getline(table, line)) ++rows;
  CHECK(rows == 3);
  CHECK(fs::exists(out / "controller.eta=0.040000000000000001" / "trajectory.csv"));

  // Without --dt-auto the larger eta values trip the step guard.
  r = esc_cli("sweep " + example_config() + " --param eta --values 0.01,0.09 --override horizon=5 --out " +
              out.string());
  CHECK(r.code == 5);
  CHECK(r.output.find("step guard") != std::string::npos);

  CHECK(esc_cli("sweep " + example_config() + " --param eta --values \"\" --out " + out.string()).code == 2);
  CHECK(esc_cli("sweep " + example_config() + " --param bogus --values 1 --out " + out.string()).code == 2);
  CHECK(esc_cli("sweep " + example_config() + " --param eta --values a,b --out " + out.string()).code == 2);
}

TEST_CASE("verify oracles passes on a correct build") {
  const auto r = esc_cli("verify oracles");
  INFO(r.output);
  CHECK(r.code == 0);
  CHECK(r.output.find("[PASS] 1.") != std::string::npos);
  CHECK(r.output.find("[PASS] 3.") != std::string::npos);
}
