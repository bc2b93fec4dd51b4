#include <cstdio>

#include "peaklab/experiments.hpp"
#include "peaklab/reproduce.hpp"

int main() {
  peaklab::AcceptanceOptions options;
  options.threads = peaklab::default_threads();
  const peaklab::AcceptanceReport report = peaklab::run_acceptance(options);
  int passed = 0;
  for (const peaklab::CriterionResult& c : report.criteria) {
    std::printf("%s\n", peaklab::format_line(c).c_str());
    passed += c.passed ? 1 : 0;
  }
  std::printf("%d/%zu acceptance criteria passed\n", passed, report.criteria.size());
  return report.all_passed() ? 0 : 1;
}
