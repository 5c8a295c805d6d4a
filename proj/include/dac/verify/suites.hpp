#pragma once

#include "dac/agent/config.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dac::verify {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string measured;   // the worst observed value, formatted
  std::string tolerance;  // the bound it was compared against
  std::string detail;     // extra context, may be empty
  double seconds = 0.0;
};

struct SuiteOptions {
  unsigned long long seed = 20240601;
  agent::FaultInjection faults;
  /// Scale factor for the exploration comparison; 1.0 runs the full protocol.
  double exploration_scale = 1.0;
  int exploration_seeds = 10;
  /// Worker threads for the exploration comparison.
  int jobs = 1;
  /// Scratch directory for suites that write files.
  std::string scratch_dir = "verify_scratch";
};

struct Suite {
  int id;
  std::string name;
  std::function<SuiteResult(const SuiteOptions&)> run;
};

SuiteResult entropy_decomposition(const SuiteOptions& opt);
SuiteResult ratio_identities(const SuiteOptions& opt);
SuiteResult ratio_optimum(const SuiteOptions& opt);
SuiteResult tabular_dpi(const SuiteOptions& opt);
SuiteResult gradient_equivalence(const SuiteOptions& opt);
SuiteResult toy_example(const SuiteOptions& opt);
SuiteResult sac_reduction(const SuiteOptions& opt);
SuiteResult gradient_integrity(const SuiteOptions& opt);
SuiteResult alpha_adaptation(const SuiteOptions& opt);
SuiteResult directional_exploration(const SuiteOptions& opt);
SuiteResult clip_contract(const SuiteOptions& opt);
SuiteResult determinism(const SuiteOptions& opt);

/// All suites in acceptance order, numbered from 1.
const std::vector<Suite>& all_suites();

/// Runs `suite`, timing it and converting exceptions into failures.
SuiteResult run_timed(const Suite& suite, const SuiteOptions& opt);

std::string format_result_line(int id, const SuiteResult& r);

}  // namespace dac::verify
