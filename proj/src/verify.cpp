#include "esc/verify.hpp"

#include "esc/analysis.hpp"
#include "esc/controller.hpp"
#include "esc/errors.hpp"
#include "esc/report.hpp"
#include "esc/runner.hpp"
#include "esc/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <iomanip>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

namespace esc::verify {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Example plant: A = [[0,1],[-4,-2]], B = C = I, coupled quadratic with y* = 2.
CascadePlant example_plant(double coupling = 0.5) {
  Matrix A(2, 2);
  A << 0, 1, -4, -2;
  LtiSubsystem lti(A, Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  return CascadePlant(std::move(lti), StaticMap::coupled_quadratic(2.0, Vector::Zero(2), coupling));
}

Vector uniform_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

// Runs are shared between criteria that look at the same scenario.
struct CachedRun {
  Scenario scenario;
  RunOutcome outcome;
  std::string error;
};

std::mutex cache_mutex;
std::map<std::string, std::shared_ptr<const CachedRun>> cache;

std::shared_ptr<const CachedRun> cached_run(const std::filesystem::path& path,
                                            const std::vector<std::string>& overrides = {}) {
  std::string key = path.string();
  for (const auto& o : overrides) key += "|" + o;
  {
    std::lock_guard lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto entry = std::make_shared<CachedRun>();
  try {
    LoadOptions opts;
    opts.overrides = overrides;
    entry->scenario = load_scenario(path, opts);
    entry->outcome = run_scenario(entry->scenario);
  } catch (const std::exception& e) {
    entry->error = e.what();
  }
  std::lock_guard lock(cache_mutex);
  cache.emplace(key, entry);
  return entry;
}

std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

}  // namespace

CheckResult oracle_equivalence(std::uint64_t seed) {
  CheckResult r{1, "Oracle equivalence: high_freq_gain vs finite-difference oracle"};
  const auto start = Clock::now();
  const CascadePlant plant = example_plant();
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector v = uniform_vector(rng, 2, -5.0, 5.0);
    const Vector analytic = plant.high_freq_gain(plant.lti().steady_state_output(v));
    const Vector oracle = fd_gradient_oracle(plant, v);
    const double rel = (analytic - oracle).norm() / std::max(oracle.norm(), 1e-300);
    worst = std::max(worst, rel);
  }
  r.seconds = since(start);
  r.passed = worst <= 1e-6 && r.seconds < 1.0;
  r.detail = "max relative error " + fmt(worst) + " (tol 1e-6), " + fmt(r.seconds) + " s (limit 1 s)";
  return r;
}

CheckResult steady_state_residual(std::uint64_t seed) {
  CheckResult r{2, "Steady-state correctness: |A x_ss + B v| <= 1e-10 (1 + |v|)"};
  const auto start = Clock::now();
  const CascadePlant plant = example_plant();
  const auto& lti = plant.lti();
  std::mt19937_64 rng(seed + 1);
  double worst = 0.0;
  bool ok = true;
  for (int i = 0; i < 100; ++i) {
    const Vector v = uniform_vector(rng, 2, -5.0, 5.0);
    const Vector x = lti.steady_state_state(v);
    const double res = (lti.A() * x + lti.B() * v).norm();
    const double ratio = res / (1.0 + v.norm());
    worst = std::max(worst, ratio);
    ok = ok && res <= 1e-10 * (1.0 + v.norm());
  }
  r.seconds = since(start);
  r.passed = ok && r.seconds < 1.0;
  r.detail = "max residual/(1+|v|) " + fmt(worst) + ", " + fmt(r.seconds) + " s (limit 1 s)";
  return r;
}

CheckResult controller_invariants(std::uint64_t seed, int draws) {
  CheckResult r{3, "Controller invariants over random parameter draws"};
  const auto start = Clock::now();
  std::mt19937_64 rng(seed + 2);
  auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  int periodic_fail = 0, share_fail = 0, law_fail = 0, ref_fail = 0, rho_fail = 0;
  for (int d = 0; d < draws; ++d) {
    ControllerParams p;
    p.p = U(0.05, 5.0);
    p.lambda = U(0.05, 10.0);
    p.epsilon_sw = U(1e-3, 0.5);
    p.gamma = U(1e-3, 1.0);
    p.L_h = U(1e-2, 2.0);
    p.eta = U(1e-3, 1.0);
    p.T_s = U(0.1, 20.0);
    p.n_dirs = std::uniform_int_distribution<int>(1, 6)(rng);
    p.scaling_mode = (d % 2 == 0) ? ScalingMode::kScaled : ScalingMode::kUnscaled;
    p.p0 = U(-5.0, 5.0);
    p.y_sat = p.p0 + U(0.0, 10.0);
    p.validate();
    const EffectiveGains g = effective_gains(p);
    const double T = p.period();

    // sigma(t + k T_s) == sigma(t)
    for (int k = 0; k < 5; ++k) {
      const double t = U(0.0, 100.0 * T);
      if (cyclic_direction_index(t, T, p.n_dirs) != cyclic_direction_index(t + T, T, p.n_dirs)) {
        ++periodic_fail;
      }
    }

    // Equal share over [0, K T_s], sampled at cell midpoints.
    const int K = std::uniform_int_distribution<int>(1, 4)(rng);
    const int per_cell = 8;
    const int samples = K * p.n_dirs * per_cell;
    std::vector<int> counts(p.n_dirs, 0);
    for (int j = 0; j < samples; ++j) {
      const double t = (j + 0.5) * (K * T / samples);
      ++counts[cyclic_direction_index(t, T, p.n_dirs) - 1];
    }
    if (std::any_of(counts.begin(), counts.end(), [&](int c) { return c != K * per_cell; })) {
      ++share_fail;
    }

    // |u|_inf == rho with exactly one nonzero component.
    for (int k = 0; k < 5; ++k) {
      const Direction dir = cyclic_direction(U(0.0, 10.0 * T), T, p.n_dirs);
      const Vector u = control_law(g.rho, dir.sigma, U(-50.0, 50.0), p.epsilon_sw);
      const auto nonzero = (u.array() != 0.0).count();
      if (u.cwiseAbs().maxCoeff() != g.rho || nonzero != 1) ++law_fail;
    }

    // y_m nondecreasing and capped.
    ControllerState st = initial_state(p);
    double prev = st.y_m;
    for (int k = 0; k < 200; ++k) {
      const double ym = reference_step(st, g.p_eff, p.y_sat, U(1e-4, 2.0));
      if (ym < prev || ym > p.y_sat) ++ref_fail;
      prev = ym;
    }

    // rho dominates eta [ (p + lambda) / L_h + gamma ].
    const double eta = p.scaling_mode == ScalingMode::kScaled ? p.eta : 1.0;
    if (!(g.rho >= eta * ((p.p + p.lambda) / p.L_h + p.gamma) - 1e-12)) ++rho_fail;
  }
  r.seconds = since(start);
  const int failures = periodic_fail + share_fail + law_fail + ref_fail + rho_fail;
  r.passed = failures == 0 && r.seconds < 5.0;
  std::ostringstream os;
  os << draws << " draws; failures: periodicity " << periodic_fail << ", equal share "
     << share_fail << ", control law " << law_fail << ", reference " << ref_fail
     << ", rho bound " << rho_fail << "; " << fmt(r.seconds) << " s (limit 5 s)";
  r.detail = os.str();
  return r;
}

CheckResult example_convergence(const std::filesystem::path& scenario, int id,
                              const std::string& name) {
  CheckResult r{id, name};
  const auto run = cached_run(scenario);
  if (!run->error.empty()) {
    r.detail = "run failed: " + run->error;
    return r;
  }
  const auto& m = *run->outcome.metrics;
  const auto& opt = *run->scenario.plant.map.optimum();
  const double z_err = (m.final_z - opt.z_star).norm();
  r.seconds = run->outcome.seconds;
  r.passed = m.bounded && m.mean_residual <= 0.3 && z_err <= 0.5 && r.seconds < 30.0;
  std::ostringstream os;
  os << scenario.filename().string() << ": trailing mean |y-y*| = " << fmt(m.mean_residual)
     << " (tol 0.3), final |z-z*| = " << fmt(z_err) << " (tol 0.5), residual_amp = "
     << fmt(m.residual_amp) << ", " << fmt(r.seconds) << " s (limit 30 s)";
  r.detail = os.str();
  return r;
}

CheckResult residual_scaling(const std::filesystem::path& scenario,
                             const std::vector<double>& etas) {
  CheckResult r{6, "Residual scaling |y-y*| <= 2.5 (sqrt(eta) + eps) across eta sweep"};
  const auto start = Clock::now();

  struct Row {
    double eta = 0.0;
    double dt = 0.0;
    std::optional<ResidualCheck> check;
    std::string error;
  };
  std::vector<std::future<Row>> jobs;
  for (double eta : etas) {
    jobs.push_back(std::async(std::launch::async, [eta, scenario] {
      Row row{eta};
      try {
        LoadOptions opts;
        opts.overrides = {"controller.eta=" + format_number(eta)};
        Scenario sc = load_scenario(scenario, opts);
        sc.analysis.c_bound = 2.5;
        row.dt = guarded_dt(sc);
        sc.sim.log_stride = std::max(1, static_cast<int>(std::lround(sc.sim.log_stride * sc.sim.dt / row.dt)));
        sc.sim.dt = row.dt;
        row.check = run_scenario(sc).residual;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      return row;
    }));
  }

  std::ostringstream os;
  bool all = true;
  double cmin = std::numeric_limits<double>::infinity();
  double cmax = 0.0;
  for (auto& job : jobs) {
    const Row row = job.get();
    os << "eta=" << row.eta << " dt=" << fmt(row.dt, 3) << ": ";
    if (!row.error.empty()) {
      all = false;
      os << "run failed (" << row.error << "); ";
      continue;
    }
    const auto& c = *row.check;
    all = all && c.pass;
    cmin = std::min(cmin, c.implied_constant);
    cmax = std::max(cmax, c.implied_constant);
    os << (c.pass ? "pass" : "FAIL") << " residual/(sqrt(eta)+eps) = " << fmt(c.implied_constant)
       << (c.pass ? "" : " [" + c.reason + "]") << "; ";
  }
  const double spread = cmin > 0.0 ? cmax / cmin : std::numeric_limits<double>::infinity();
  os << "constant spread " << fmt(spread) << " (limit < 3)";
  r.passed = all && spread < 3.0;
  r.seconds = since(start);
  r.detail = os.str();
  return r;
}

CheckResult sliding_evidence(const std::filesystem::path& scenario) {
  CheckResult r{7, "Sliding-mode evidence before reaching the delta-vicinity"};
  const auto run = cached_run(scenario);
  if (!run->error.empty()) {
    r.detail = "run failed: " + run->error;
    return r;
  }
  const auto& m = *run->outcome.metrics;
  const double min_duration = 50.0 * run->scenario.sim.dt;
  std::ostringstream os;
  os << scenario.filename().string() << ": " << m.sliding_segments.size() << " segments";
  if (!m.t_reach_delta) {
    os << ", delta-vicinity never reached";
    r.detail = os.str();
    return r;
  }
  const double t_reach = *m.t_reach_delta;
  const auto hit = std::find_if(m.sliding_segments.begin(), m.sliding_segments.end(),
                                [&](const SlidingSegment& s) {
                                  return std::min(s.t_end, t_reach) - s.t_start >= min_duration;
                                });
  os << ", t_reach_delta = " << fmt(t_reach);
  if (hit != m.sliding_segments.end()) {
    os << ", first qualifying segment [" << fmt(hit->t_start) << ", " << fmt(hit->t_end)
       << "] on band k = " << hit->band;
    r.passed = true;
  } else {
    os << ", none lasting " << fmt(min_duration) << " s before it";
  }
  r.detail = os.str();
  return r;
}

CheckResult no_finite_escape(const std::vector<std::filesystem::path>& scenarios) {
  CheckResult r{8, "No finite-time escape; dt-halved rerun agrees within residual amplitude"};
  const auto start = Clock::now();
  std::ostringstream os;
  bool all = scenarios.size() > 0;
  for (const auto& path : scenarios) {
    const auto base = cached_run(path);
    os << path.filename().string() << ": ";
    if (!base->error.empty()) {
      all = false;
      os << "FAIL run aborted (" << base->error << "); ";
      continue;
    }
    const auto& sc = base->scenario;
    const bool finite = base->outcome.trajectory.all_finite() &&
                        std::abs(base->outcome.trajectory.t().back() - sc.sim.horizon) <=
                            sc.sim.dt * sc.sim.log_stride;
    const auto half = cached_run(path, {"sim.dt=" + format_number(sc.sim.dt / 2),
                                        "sim.log_stride=" + std::to_string(sc.sim.log_stride * 2)});
    if (!half->error.empty()) {
      all = false;
      os << "FAIL dt/2 rerun aborted (" << half->error << "); ";
      continue;
    }
    bool agree = true;
    if (base->outcome.metrics && half->outcome.metrics) {
      const auto& a = *base->outcome.metrics;
      const auto& b = *half->outcome.metrics;
      const double dy = std::abs(a.final_y - b.final_y);
      const double dz = (a.final_z - b.final_z).norm();
      const double amp_y = std::max(a.residual_amp, b.residual_amp);
      const double amp_z = std::max(a.z_residual_amp, b.z_residual_amp);
      agree = dy <= amp_y && dz <= amp_z;
      os << "|dy| = " << fmt(dy) << " vs " << fmt(amp_y) << ", |dz| = " << fmt(dz) << " vs "
         << fmt(amp_z) << ", ";
    }
    const bool ok = finite && agree && half->outcome.trajectory.all_finite();
    all = all && ok;
    os << (ok ? "pass" : "FAIL") << "; ";
  }
  r.passed = all;
  r.seconds = since(start);
  r.detail = os.str();
  return r;
}

std::vector<std::filesystem::path> shipped_scenarios(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".cfg") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CheckResult> oracle_suite() {
  return {oracle_equivalence(), steady_state_residual(), controller_invariants()};
}

std::vector<CheckResult> scenario_suite(const std::filesystem::path& dir) {
  return {example_convergence(dir / "paper_example.cfg", 4,
                            "Two-input example converges from z0 = (-2, 4)"),
          example_convergence(dir / "paper_example_b.cfg", 5,
                            "Two-input example converges from z0 = (0, 5)"),
          sliding_evidence(dir / "paper_example.cfg"), no_finite_escape(shipped_scenarios(dir))};
}

std::vector<CheckResult> sweep_suite(const std::filesystem::path& dir) {
  return {residual_scaling(dir / "paper_example.cfg")};
}

bool print_table(const std::vector<CheckResult>& results, std::ostream& out) {
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    out << (r.passed ? "[PASS] " : "[FAIL] ") << r.id << ". " << r.name << "\n       "
        << r.detail << "\n";
  }
  return all;
}

}  // namespace esc::verify
