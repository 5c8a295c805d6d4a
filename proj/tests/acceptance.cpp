// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "dac/verify/suites.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> ids;
  std::string inject;
  dac::verify::SuiteOptions opt;
  app.add_option("--criterion", ids, "criterion ids to run (default: all)");
  app.add_option("--inject", inject, "ratio-sign-flip or drop-value-clip")
      ->check(CLI::IsMember({"ratio-sign-flip", "drop-value-clip"}));
  app.add_option("--scratch", opt.scratch_dir, "directory for files written by the suites");
  app.add_option("--jobs", opt.jobs, "threads for the exploration comparison");
  CLI11_PARSE(app, argc, argv);
  opt.faults.flip_ratio_grad_sign = inject == "ratio-sign-flip";
  opt.faults.drop_value_clip = inject == "drop-value-clip";

  bool all_passed = true;
  int ran = 0;
  for (const auto& suite : dac::verify::all_suites()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), suite.id) == ids.end()) continue;
    const auto result = dac::verify::run_timed(suite, opt);
    std::cout << dac::verify::format_result_line(suite.id, result) << std::endl;
    all_passed = all_passed && result.passed;
    ++ran;
  }
  if (ran == 0) {
    std::cerr << "no criterion matched\n";
    return 2;
  }
  return all_passed ? 0 : 1;
}
