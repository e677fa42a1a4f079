// Acceptance suite: one PASS/FAIL line per criterion 1-8. Thresholds and
// tolerances live in esc/verify (src/verify.cpp) and are fixed there.

#include "esc/verify.hpp"

#include <filesystem>
#include <iostream>

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? std::filesystem::path(argv[1])
                                             : std::filesystem::path(ESC_SCENARIO_DIR);
  std::vector<esc::verify::CheckResult> all;
  for (auto&& part : {esc::verify::oracle_suite(), esc::verify::scenario_suite(dir),
                      esc::verify::sweep_suite(dir)}) {
    all.insert(all.end(), part.begin(), part.end());
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  const bool ok = esc::verify::print_table(all, std::cout);
  std::cout << (ok ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << "\n";
  return ok ? 0 : 1;
}
