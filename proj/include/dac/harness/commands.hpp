#pragma once

#include "dac/agent/config.hpp"
#include "dac/policy_iteration.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dac::harness {

/// Bad user input: unreadable files, unknown names, inconsistent settings.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Parses "3", "1,4,9" or "1-10" into a list of seeds.
std::vector<unsigned long long> parse_seed_list(const std::string& text);

struct TabularDpiOptions {
  /// Path of an MDP text file; empty means "generate a random MDP".
  std::string mdp_file;
  int gen_states = 6;
  int gen_actions = 3;
  double gen_gamma = 0.9;
  unsigned long long seed = 1;
  /// Fixed buffer distribution q: "uniform" or "random".
  std::string buffer = "uniform";
  dpi::DpiConfig dpi;
  /// Where to write the trace CSV; empty skips the file.
  std::string trace_out;
};

struct TabularDpiOutcome {
  dpi::DpiTrace trace;
  bool monotone = true;
  std::string violation;
};

/// Runs diverse policy iteration and prints a short report. A monotonicity
/// violation is captured in the outcome rather than thrown.
TabularDpiOutcome cmd_tabular_dpi(const TabularDpiOptions& options, std::ostream& log);

struct ToyOptions {
  int n_actions = 10;
  /// Also train the neural agent on the continuous one-step analog.
  bool continuous = false;
  long long gradient_steps = 3000;
  int samples_per_bin = 50;
  unsigned long long seed = 1;
};

struct ToyOutcome {
  dpi::ToyResult tabular;
  /// Policy mass on the unseen bin after training; NaN unless continuous.
  double dac_unseen_mass = 0.0;
  double sac_unseen_mass = 0.0;
};

ToyOutcome cmd_toy(const ToyOptions& options, std::ostream& log);

/// Agent settings used by maze-explore unless overridden.
agent::DacHyper default_maze_hyper();

struct MazeExploreOptions {
  std::vector<unsigned long long> seeds{1};
  std::vector<double> alphas{0.5, 1.0, 0.0};
  long long steps = 50000;
  std::vector<long long> checkpoints{5000, 50000, 300000};
  long long log_interval = 1000;
  agent::DacHyper hyper = default_maze_hyper();
  std::string out_dir = "maze_out";
  int jobs = 1;
};

struct MazeExploreOutcome {
  /// Final unique-cell counts per run id, in seed order.
  std::map<std::string, std::vector<int>> unique_cells;
};

/// Run identifier for one agent variant, e.g. "alpha0.5".
std::string maze_run_id(double alpha);

MazeExploreOutcome cmd_maze_explore(const MazeExploreOptions& options, std::ostream& log);

struct TrainOptions {
  /// maze, chain, delayed-chain, sparse-chain or continuous-toy.
  std::string env = "chain";
  agent::DacHyper hyper;
  long long steps = 10000;
  long long log_interval = 1000;
  int eval_episodes = 0;
  int delay = 20;
  unsigned long long seed = 1;
  std::string out_dir = "train_out";
  bool save_checkpoint = true;
};

struct TrainOutcome {
  long long records = 0;
  double final_return = 0.0;
};

/// Writes `<out_dir>/metrics.csv` and, if requested, a checkpoint at the end.
TrainOutcome cmd_train(const TrainOptions& options, std::ostream& log);

/// Column order of the training metrics CSV.
const std::vector<std::string>& training_metric_columns();

}  // namespace dac::harness
