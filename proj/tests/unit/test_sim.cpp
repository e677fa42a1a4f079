#include "esc/errors.hpp"
#include "esc/sim.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using esc::Matrix;
using esc::Vector;

namespace {

Matrix example_A() {
  Matrix A(2, 2);
  A << 0, 1, -4, -2;
  return A;
}

esc::CascadePlant example_plant() {
  esc::LtiSubsystem lti(example_A(), Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  return esc::CascadePlant(lti, esc::StaticMap::coupled_quadratic(2.0, Vector::Zero(2), 0.5));
}

esc::ControllerParams example_params() {
  esc::ControllerParams p;
  p.y_sat = 2.5;
  return p;
}

esc::SimConfig short_config(double horizon = 0.01) {
  esc::SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = horizon;
  cfg.x0 = Vector{{-2.0, 4.0}};
  return cfg;
}

}  // namespace

TEST_CASE("equilibrium stays put without input") {
  auto plant = example_plant();
  for (int k = 0; k < 1000; ++k) plant.advance(Vector::Zero(2), 1e-3);
  CHECK(plant.x().isZero());
  CHECK(plant.v().isZero());
}

TEST_CASE("one closed-loop step: measure, control, integrate") {
  auto plant = example_plant();
  plant.set_state(Vector::Zero(2), Vector{{-2.0, 4.0}});
  esc::ClosedLoop loop(plant, example_params());
  const auto rec = loop.step(1e-3);
  CHECK(rec.y == doctest::Approx(-26.0));
  const double u1 = loop.last_input()(0);
  CHECK(std::abs(u1) == doctest::Approx(0.501));
  CHECK(loop.plant().v()(0) == doctest::Approx(u1 * 1e-3));
  CHECK(loop.plant().v()(1) == 0.0);
  CHECK(loop.plant().x()(0) == doctest::Approx(-1.996));
  CHECK(loop.plant().x()(1) == doctest::Approx(4.0));
}

TEST_CASE("sample bookkeeping") {
  const auto traj = esc::run(example_plant(), example_params(), short_config());
  REQUIRE(traj.size() == 11);
  for (std::size_t k = 0; k < traj.size(); ++k) CHECK(traj.t()[k] == k * 1e-3);
  CHECK(traj.y()[0] == doctest::Approx(-26.0));
  CHECK(traj.z(0).isApprox(Vector{{-2.0, 4.0}}));

  auto cfg = short_config(1.0);
  cfg.log_stride = 10;
  const auto strided = esc::run(example_plant(), example_params(), cfg);
  CHECK(strided.size() == 101);
  CHECK(strided.t().back() == doctest::Approx(1.0));
}

TEST_CASE("runs are bit-for-bit deterministic") {
  const auto cfg = short_config(20.0);
  CHECK(esc::run(example_plant(), example_params(), cfg) ==
        esc::run(example_plant(), example_params(), cfg));
}

TEST_CASE("quasi-steady start solves the algebraic equation") {
  esc::LtiSubsystem lti(example_A(), Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  const Vector x0{{-2.0, 4.0}};
  const Vector v0 = esc::quasi_steady_input(lti, x0);
  CHECK((example_A() * x0 + v0).norm() < 1e-12);

  auto cfg = short_config();
  cfg.quasi_steady = true;
  const auto traj = esc::run(example_plant(), example_params(), cfg);
  CHECK(traj.v(0).isApprox(v0));
}

TEST_CASE("step-size guard") {
  const auto guard = esc::compute_dt_guard(example_plant(), example_params(), Vector{{-2.0, 4.0}});
  CHECK(guard.gain_bound > 0);
  CHECK(guard.plant_limit == doctest::Approx(1.0 / example_A().operatorNorm()));
  CHECK(guard.bound() >= 1e-3);

  auto cfg = short_config();
  cfg.dt = 0.5;
  cfg.horizon = 5;
  CHECK_THROWS_AS(esc::run(example_plant(), example_params(), cfg), esc::ConfigError);
  cfg.dt_guard = false;
  CHECK_NOTHROW(esc::run(example_plant(), example_params(), cfg));
}

TEST_CASE("invalid simulation settings") {
  auto cfg = short_config();
  cfg.dt = 0;
  CHECK_THROWS_AS(esc::run(example_plant(), example_params(), cfg), esc::ConfigError);
  cfg = short_config();
  cfg.x0 = Vector::Zero(3);
  CHECK_THROWS_AS(esc::run(example_plant(), example_params(), cfg), esc::ConfigError);
  cfg = short_config();
  cfg.log_stride = 0;
  CHECK_THROWS_AS(esc::run(example_plant(), example_params(), cfg), esc::ConfigError);
}

TEST_CASE("unstable plant: rejected by default, aborts on blow-up when allowed") {
  esc::LtiSubsystem lti(50.0 * Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                        Matrix::Identity(2, 2), 1.0, true);
  esc::CascadePlant plant(lti, esc::StaticMap::coupled_quadratic(2.0, Vector::Zero(2), 0.5));
  auto cfg = short_config(100.0);
  cfg.dt_guard = false;
  CHECK_THROWS_AS(esc::run(plant, example_params(), cfg), esc::ConfigError);
  cfg.allow_unstable = true;
  CHECK_THROWS_AS(esc::run(plant, example_params(), cfg), esc::SimulationAbort);
}

TEST_CASE("linear map: output tracks the unsaturated ramp") {
  // The linear block must be fast against the relay: at time_scale 0.01 the lag
  // is comparable to the band-crossing time and tracking degrades to ~0.17.
  esc::LtiSubsystem lti(-Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                        1e-3);
  esc::CascadePlant plant(lti, esc::StaticMap::linear(Vector{{1.0, 0.5}}));
  esc::ControllerParams p;
  p.scaling_mode = esc::ScalingMode::kUnscaled;
  p.p = 0.5;
  p.lambda = 1.0;
  p.L_h = 0.5;
  p.T_s = 2.0;
  esc::SimConfig cfg;
  cfg.dt = 1e-5;
  cfg.horizon = 20.0;
  cfg.log_stride = 1;
  cfg.x0 = Vector{{-1.0, 0.0}};
  cfg.quasi_steady = true;
  const auto traj = esc::run(plant, p, cfg);

  const double tol = 2 * p.epsilon_sw + p.lambda * cfg.dt;
  const auto e = traj.e();
  std::size_t first_in = e.size();
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (std::abs(e[k]) <= tol) {
      first_in = k;
      break;
    }
  }
  REQUIRE(first_in < e.size() / 2);
  double worst = 0;
  for (std::size_t k = first_in; k < e.size(); ++k) worst = std::max(worst, std::abs(e[k]));
  CHECK(worst <= tol);
  CHECK(traj.y().back() == doctest::Approx(traj.y_m().back()).epsilon(0.01));
  CHECK(traj.y_m().back() == doctest::Approx(10.0).epsilon(1e-6));
}
