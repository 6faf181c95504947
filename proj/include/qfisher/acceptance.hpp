#pragma once

// The end-to-end acceptance checks, shared by the `reproduce` subcommand and
// the acceptance test binary.

#include <cstdint>
#include <string>
#include <vector>

namespace qfisher {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  /// Deterministic diagnostic text (no timings).
  std::string detail;
  /// Wall-clock seconds spent on the criterion; not part of any summary.
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 1;
  /// Worker threads; 0 uses QFISHER_THREADS or the hardware concurrency.
  unsigned threads = 0;
};

/// Worker count from QFISHER_THREADS (if set and positive) capped by the
/// hardware concurrency.
unsigned thread_budget();

/// Criteria 1 to 9, in id order. Independent checks may run concurrently;
/// results do not depend on the schedule.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

/// Fixed-width table, one line per criterion, ending with an overall line.
std::string summary_table(const std::vector<CriterionResult>& results);

}  // namespace qfisher
