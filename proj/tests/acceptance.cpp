// Acceptance gate: runs every pinned criterion and prints one line each.
// Exit status is the number of failing criteria (0 when the gate is green).

#include <cstdio>
#include <exception>

#include "mcl/harness.hpp"

int main() {
  std::vector<mcl::harness::CriterionResult> results;
  try {
    results = mcl::harness::run_acceptance();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
    return 99;
  }
  int failures = 0;
  for (const auto& r : results) {
    std::printf("%-4s %-4s (%8.1f ms)  %s\n", r.id.c_str(),
                r.pass ? "PASS" : "FAIL", r.runtime_ms, r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failures;
  }
  std::printf("acceptance: %zu criteria, %d failed\n", results.size(),
              failures);
  return failures;
}
