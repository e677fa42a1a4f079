#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace esc::verify {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

inline constexpr std::uint64_t kDefaultSeed = 20240607;

// Oracles.
CheckResult oracle_equivalence(std::uint64_t seed = kDefaultSeed);
CheckResult steady_state_residual(std::uint64_t seed = kDefaultSeed);
CheckResult controller_invariants(std::uint64_t seed = kDefaultSeed, int draws = 1000);

// Closed-loop criteria on shipped scenario files.
CheckResult example_convergence(const std::filesystem::path& scenario, int id,
                              const std::string& name);
CheckResult residual_scaling(const std::filesystem::path& scenario,
                             const std::vector<double>& etas = {0.01, 0.04, 0.09});
CheckResult sliding_evidence(const std::filesystem::path& scenario);
CheckResult no_finite_escape(const std::vector<std::filesystem::path>& scenarios);

/// Every *.cfg file in the directory, sorted.
std::vector<std::filesystem::path> shipped_scenarios(const std::filesystem::path& dir);

std::vector<CheckResult> oracle_suite();
std::vector<CheckResult> scenario_suite(const std::filesystem::path& scenario_dir);
std::vector<CheckResult> sweep_suite(const std::filesystem::path& scenario_dir);

/// One "[PASS]/[FAIL]" line per result; returns true when all passed.
bool print_table(const std::vector<CheckResult>& results, std::ostream& out);

}  // namespace esc::verify
