#include "esc/controller.hpp"
#include "esc/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using esc::Vector;

namespace {

esc::ControllerParams example_params() {
  esc::ControllerParams p;
  p.p = 1.0;
  p.p0 = 0.0;
  p.lambda = 4.0;
  p.epsilon_sw = 0.02;
  p.gamma = 0.1;
  p.L_h = 0.1;
  p.eta = 0.01;
  p.T_s = 5.0;
  p.n_dirs = 2;
  return p;
}

Vector e_(int n, int i) { return Vector::Unit(n, i); }

}  // namespace

TEST_CASE("effective gains, scaled and unscaled") {
  auto p = example_params();
  auto g = esc::effective_gains(p);
  CHECK(g.p_eff == doctest::Approx(0.01));
  CHECK(g.lambda_eff == doctest::Approx(0.04));
  CHECK(g.rho == doctest::Approx(0.501));

  p.scaling_mode = esc::ScalingMode::kUnscaled;
  g = esc::effective_gains(p);
  CHECK(g.p_eff == doctest::Approx(1.0));
  CHECK(g.lambda_eff == doctest::Approx(4.0));
  CHECK(g.rho == doctest::Approx(50.1));

  p.scaling_mode = esc::ScalingMode::kScaled;
  p.eta = 1.0;
  g = esc::effective_gains(p);
  CHECK(g.rho == doctest::Approx(50.1));
  CHECK(g.p_eff == doctest::Approx(1.0));
}

TEST_CASE("parameter validation names the field") {
  auto p = example_params();
  p.T_s = -1;
  try {
    p.validate();
    FAIL("negative T_s accepted");
  } catch (const esc::ConfigError& e) {
    CHECK(e.field() == "controller.T_s");
  }
  p = example_params();
  p.eta = 1.5;
  CHECK_THROWS_AS(p.validate(), esc::ConfigError);
  p = example_params();
  p.epsilon_sw = 0;
  CHECK_THROWS_AS(p.validate(), esc::ConfigError);
  CHECK_NOTHROW(example_params().validate());
}

TEST_CASE("reference ramp") {
  esc::ControllerState st;
  for (int k = 0; k < 100; ++k) esc::reference_step(st, 0.01, std::numeric_limits<double>::infinity(), 1.0);
  CHECK(st.y_m == doctest::Approx(1.0));

  st.y_m = 1.99;
  CHECK(esc::reference_step(st, 0.01, 2.0, 10.0) == doctest::Approx(2.0));

  st.y_m = 0.7;
  CHECK(esc::reference_step(st, 0.0, 2.0, 123.0) == 0.7);
}

TEST_CASE("sliding variable integration") {
  esc::ControllerState st;
  double s = 0;
  for (int k = 0; k < 250; ++k) s = esc::sliding_variable_step(st, 1.0, 4.0, 0.001);
  CHECK(esc::sliding_variable(st, 1.0) == doctest::Approx(2.0));
  (void)s;

  esc::ControllerState zero;
  for (int k = 0; k < 100; ++k) {
    CHECK(esc::sliding_variable_step(zero, 0.0, 4.0, 0.001) == 0.0);
  }

  esc::ControllerState flip;
  for (int k = 0; k < 20; ++k) {
    esc::sliding_variable_step(flip, 0.3, 4.0, 0.001);
    esc::sliding_variable_step(flip, -0.3, 4.0, 0.001);
    CHECK(flip.s_int == doctest::Approx(0.0));
  }
}

TEST_CASE("cyclic direction schedule") {
  auto d = esc::cyclic_direction(0.0, 5.0, 2);
  CHECK(d.index == 1);
  CHECK(d.sigma.isApprox(e_(2, 0)));
  d = esc::cyclic_direction(2.6, 5.0, 2);
  CHECK(d.index == 2);
  CHECK(d.sigma.isApprox(e_(2, 1)));
  CHECK(esc::cyclic_direction_index(5.0, 5.0, 2) == 1);
}

TEST_CASE("control law examples") {
  CHECK(esc::control_law(0.5, e_(2, 0), 0.01, 0.02).isApprox(Vector{{0.5, 0.0}}));
  CHECK(esc::control_law(0.5, e_(2, 0), 0.03, 0.02).isApprox(Vector{{-0.5, 0.0}}));
  CHECK(esc::control_law(0.5, e_(2, 1), 0.0, 0.02).isApprox(Vector{{0.0, 0.5}}));
  CHECK(esc::switching_sign(0.0, 0.02) == 1.0);
}

TEST_CASE("switching sign matches sgn(sin) away from band edges (property)") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> S(-50, 50);
  for (int k = 0; k < 10000; ++k) {
    const double s = S(rng);
    const double sn = std::sin(M_PI * s / 0.02);
    if (std::abs(sn) < 1e-6) continue;
    CHECK(esc::switching_sign(s, 0.02) == (sn > 0 ? 1.0 : -1.0));
  }
}

TEST_CASE("controller step composition") {
  const auto p = example_params();
  const auto g = esc::effective_gains(p);
  auto st = esc::initial_state(p);
  auto out = esc::controller_step(p, g, st, 0.0, 1e-3);
  CHECK(out.telemetry.e == 0.0);
  CHECK(out.telemetry.s == 0.0);
  CHECK(out.u.isApprox(Vector{{g.rho, 0.0}}));

  // Shipped example initial point: y(0) = -26 against y_m = 0.
  st = esc::initial_state(p);
  out = esc::controller_step(p, g, st, -26.0, 1e-3);
  CHECK(out.telemetry.e == -26.0);
  CHECK(out.telemetry.s == -26.0);
  CHECK(std::abs(out.u(0)) == doctest::Approx(0.501));
  CHECK(out.u(1) == 0.0);
  CHECK(st.t == doctest::Approx(1e-3));
  CHECK(st.y_m == doctest::Approx(1e-5));

  CHECK_THROWS_AS(esc::controller_step(p, g, st, std::nan(""), 1e-3), esc::SimulationAbort);
  CHECK_THROWS_AS(esc::controller_step(p, g, st, INFINITY, 1e-3), esc::SimulationAbort);
}

TEST_CASE("controller invariants over random parameter draws (property)") {
  std::mt19937_64 rng(20240607);
  std::uniform_real_distribution<double> U(0, 1);
  for (int draw = 0; draw < 1000; ++draw) {
    esc::ControllerParams p;
    p.p = 0.1 + 5 * U(rng);
    p.p0 = -2 + 4 * U(rng);
    p.y_sat = p.p0 + 0.5 + 5 * U(rng);
    p.lambda = 0.1 + 10 * U(rng);
    p.epsilon_sw = 0.001 + 0.1 * U(rng);
    p.gamma = U(rng);
    p.L_h = 0.01 + U(rng);
    p.eta = 0.001 + 0.999 * U(rng);
    p.T_s = 0.5 + 10 * U(rng);
    p.n_dirs = 1 + static_cast<int>(4 * U(rng));
    p.validate();
    const auto g = esc::effective_gains(p);

    // Scaled modulation never drops below eta times the unscaled design.
    CHECK(g.rho >= p.eta * ((p.p + p.lambda) / p.L_h + p.gamma) - 1e-12);

    // Schedule: periodic, and each direction owns an equal share of the period.
    const double t = 100 * U(rng);
    CHECK(esc::cyclic_direction_index(t, p.T_s, p.n_dirs) ==
          esc::cyclic_direction_index(t + 3 * p.T_s, p.T_s, p.n_dirs));
    for (int i = 0; i < p.n_dirs; ++i) {
      const double mid = (i + 0.5) * p.T_s / p.n_dirs;
      CHECK(esc::cyclic_direction_index(mid, p.T_s, p.n_dirs) == i + 1);
    }

    // Control: exactly one nonzero component of magnitude rho.
    const double s = -10 + 20 * U(rng);
    const auto dir = esc::cyclic_direction(t, p.T_s, p.n_dirs);
    const Vector u = esc::control_law(g.rho, dir.sigma, s, p.epsilon_sw);
    CHECK(u.lpNorm<Eigen::Infinity>() == doctest::Approx(g.rho));
    CHECK((u.array() != 0.0).count() == 1);

    // Reference: monotone non-decreasing and capped at y_sat.
    auto st = esc::initial_state(p);
    double prev = st.y_m;
    for (int k = 0; k < 50; ++k) {
      const double y_m = esc::reference_step(st, g.p_eff, p.y_sat, 0.5 * U(rng) + 0.01);
      CHECK(y_m >= prev);
      CHECK(y_m <= p.y_sat);
      prev = y_m;
    }
  }
}
