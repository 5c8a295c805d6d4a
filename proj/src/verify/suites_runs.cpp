#include "dac/harness/commands.hpp"
#include "dac/harness/csv.hpp"
#include "dac/verify/suites.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

namespace dac::verify {

namespace fs = std::filesystem;

namespace {

using harness::format_double;

/// P(X >= wins) for X ~ Binomial(n, 1/2).
double sign_test_p_value(int wins, int n) {
  double p = 0.0;
  for (int k = wins; k <= n; ++k) p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
  return p * std::ldexp(1.0, -n);
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Files under `a` whose bytes differ from (or are missing in) `b`, plus the reverse.
std::vector<std::string> differing_files(const fs::path& a, const fs::path& b, int& compared) {
  std::vector<std::string> diff;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    ++compared;
    if (!fs::exists(b / rel) || read_bytes(entry.path()) != read_bytes(b / rel)) diff.push_back(rel.string());
  }
  for (const auto& entry : fs::recursive_directory_iterator(b)) {
    if (entry.is_regular_file() && !fs::exists(a / fs::relative(entry.path(), b))) {
      diff.push_back(fs::relative(entry.path(), b).string());
    }
  }
  return diff;
}

void run_commands_into(const fs::path& dir, unsigned long long seed) {
  std::ostringstream sink;

  harness::TabularDpiOptions dpi;
  dpi.seed = seed;
  dpi.buffer = "random";
  dpi.trace_out = (dir / "tabular" / "trace.csv").string();
  harness::cmd_tabular_dpi(dpi, sink);

  harness::TrainOptions train;
  train.env = "delayed-chain";
  train.hyper.alpha_mode = agent::AlphaMode::adaptive;
  train.hyper.hidden = {16, 16};
  train.hyper.batch_size = 32;
  train.hyper.horizon = 100;
  train.steps = 1500;
  train.log_interval = 250;
  train.seed = seed;
  train.out_dir = (dir / "train").string();
  harness::cmd_train(train, sink);

  harness::MazeExploreOptions maze;
  maze.seeds = {seed, seed + 1};
  maze.steps = 1500;
  maze.checkpoints = {500, 1500};
  maze.log_interval = 250;
  maze.hyper.hidden = {16, 16};
  maze.hyper.batch_size = 32;
  maze.jobs = 2;
  maze.out_dir = (dir / "maze").string();
  harness::cmd_maze_explore(maze, sink);
}

}  // namespace

SuiteResult directional_exploration(const SuiteOptions& opt) {
  harness::MazeExploreOptions maze;
  maze.seeds.clear();
  for (int i = 0; i < opt.exploration_seeds; ++i) maze.seeds.push_back(opt.seed + static_cast<unsigned long long>(i));
  maze.alphas = {0.5, 1.0};
  maze.steps = std::llround(50000 * opt.exploration_scale);
  maze.checkpoints = {maze.steps};
  maze.log_interval = std::max<long long>(1, maze.steps / 10);
  maze.jobs = opt.jobs;
  maze.out_dir = (fs::path(opt.scratch_dir) / "exploration").string();
  std::ostringstream sink;
  const auto outcome = harness::cmd_maze_explore(maze, sink);

  const auto& dac = outcome.unique_cells.at(harness::maze_run_id(0.5));
  const auto& sac = outcome.unique_cells.at(harness::maze_run_id(1.0));
  const int n = static_cast<int>(dac.size());
  int wins = 0;
  double mean_dac = 0.0, mean_sac = 0.0;
  for (int i = 0; i < n; ++i) {
    wins += dac[i] > sac[i] ? 1 : 0;
    mean_dac += dac[i];
    mean_sac += sac[i];
  }
  mean_dac /= n;
  mean_sac /= n;
  const double p = sign_test_p_value(wins, n);
  constexpr double kLevel = 0.05;
  SuiteResult r;
  r.passed = mean_dac > mean_sac && p <= kLevel;
  r.measured = format_double(p);
  r.tolerance = format_double(kLevel);
  r.detail = "sign-test p-value; alpha=0.5 beats alpha=1 on " + std::to_string(wins) + "/" + std::to_string(n) +
             " seeds; mean unique cells " + format_double(mean_dac) + " vs " + format_double(mean_sac) + " at " +
             std::to_string(maze.steps) + " steps";
  return r;
}

SuiteResult determinism(const SuiteOptions& opt) {
  const fs::path root = fs::path(opt.scratch_dir) / "determinism";
  fs::remove_all(root);
  run_commands_into(root / "first", opt.seed);
  run_commands_into(root / "second", opt.seed);
  int compared = 0;
  const auto diff = differing_files(root / "first", root / "second", compared);
  SuiteResult r;
  r.passed = diff.empty() && compared > 0;
  r.measured = std::to_string(diff.size());
  r.tolerance = "0";
  r.detail = "differing files out of " + std::to_string(compared) + " compared";
  if (!diff.empty()) r.detail += "; first: " + diff.front();
  return r;
}

const std::vector<Suite>& all_suites() {
  static const std::vector<Suite> suites{
      {1, "entropy_decomposition", entropy_decomposition},
      {2, "ratio_identities", ratio_identities},
      {3, "ratio_optimum", ratio_optimum},
      {4, "tabular_dpi", tabular_dpi},
      {5, "gradient_equivalence", gradient_equivalence},
      {6, "toy_example", toy_example},
      {7, "sac_reduction", sac_reduction},
      {8, "gradient_integrity", gradient_integrity},
      {9, "alpha_adaptation", alpha_adaptation},
      {10, "directional_exploration", directional_exploration},
      {11, "clip_contract", clip_contract},
      {12, "determinism", determinism},
  };
  return suites;
}

SuiteResult run_timed(const Suite& suite, const SuiteOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r;
  try {
    r = suite.run(opt);
  } catch (const std::exception& e) {
    r = SuiteResult{};
    r.passed = false;
    r.measured = "error";
    r.tolerance = "-";
    r.detail = std::string("exception: ") + e.what();
  }
  r.name = suite.name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string format_result_line(int id, const SuiteResult& r) {
  char time[32];
  std::snprintf(time, sizeof time, "%.2fs", r.seconds);
  std::string line = std::string(r.passed ? "PASS" : "FAIL") + " [" + std::to_string(id) + "] " + r.name +
                     " measured=" + r.measured + " tolerance=" + r.tolerance + " time=" + time;
  if (!r.detail.empty()) line += " (" + r.detail + ")";
  return line;
}

}  // namespace dac::verify
