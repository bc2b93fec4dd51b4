#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace peaklab {

/// Tolerances of the acceptance suite.
namespace acceptance {
inline constexpr double scaling_spread = 1e-10;
inline constexpr double hardy_floor = -1e-10;
inline constexpr double squeeze_floor = -1e-6;
inline constexpr double simplicity_gap = 1e-8;
inline constexpr double small_alpha_constant = 3.0;
inline constexpr double square_fem_rel = 0.01;
inline constexpr double slope_rel = 0.05;
inline constexpr double coefficient_rel = 0.15;
inline constexpr double agmon_max_over_min = 2.0;
inline constexpr double pullback_budget = 1e-8;
inline constexpr double window_spread = 3.0;
inline constexpr double dense_lanczos_rel = 1e-8;
}  // namespace acceptance

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string summary;
  std::vector<std::pair<std::string, double>> metrics;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  /// Criteria to run (1..10); empty runs all. Criterion 10 also needs the
  /// solves of 5, 6 and 9 and runs them if they are not selected.
  std::vector<int> only;
  int threads = 1;
  std::uint64_t seed = 20240611;
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  bool all_passed() const;
};

AcceptanceReport run_acceptance(const AcceptanceOptions& options);

/// "PASS  6  main asymptotics  slope ..." single line.
std::string format_line(const CriterionResult& result);

}  // namespace peaklab
