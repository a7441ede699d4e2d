// Acceptance gate: runs the named verification suites and prints one
// pass/fail line per criterion row. With no arguments, runs everything.

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "medflow/pipeline.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> names;
  for (int i = 1; i < argc; ++i) names.emplace_back(argv[i]);
  if (names.empty()) names = medflow::verify_suite_names();

  bool all_pass = true;
  for (const auto& name : names) {
    medflow::SuiteResult res;
    try {
      res = medflow::run_verify_suite(name, 0);
    } catch (const std::exception& e) {
      std::printf("[FAIL] %-18s error: %s\n", name.c_str(), e.what());
      all_pass = false;
      continue;
    }
    for (const auto& row : res.rows)
      std::printf("[%s] %-34s %-32s measured=%-12.6g predicted=%-12.6g tol=%.3g\n",
                  row.pass ? "PASS" : "FAIL", row.test.c_str(), row.parameter.c_str(),
                  row.measured, row.predicted, row.tolerance);
    std::printf("[%s] suite %-18s (%.1f s)\n", res.pass ? "PASS" : "FAIL", name.c_str(),
                res.seconds);
    all_pass = all_pass && res.pass;
  }
  return all_pass ? 0 : 1;
}
