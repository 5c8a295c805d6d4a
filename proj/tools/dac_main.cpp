#include "dac/harness/commands.hpp"
#include "dac/verify/suites.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace {

using dac::harness::ConfigError;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

/// Reads `key = value` lines ('#' starts a comment) into `--key=value` arguments.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::vector<std::string> args;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(number) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() || key == "config") throw ConfigError(path + ":" + std::to_string(number) + ": bad key");
    args.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }
  return args;
}

/// Splices the config file's settings directly after the subcommand name.
/// Options keep the last value they receive, so explicit flags win.
std::vector<std::string> expand_config(int argc, char** argv, const std::set<std::string>& subcommands) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    }
  }
  if (config.empty()) return args;
  const auto extra = config_arguments(config);
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (subcommands.count(args[i])) {
      args.insert(args.begin() + static_cast<std::ptrdiff_t>(i) + 1, extra.begin(), extra.end());
      return args;
    }
  }
  throw ConfigError("--config needs a subcommand to apply to");
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(trim(item));
    T v{};
    if (!(is >> v) || !is.eof()) throw ConfigError(std::string("bad entry '") + item + "' in " + what);
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(std::string(what) + " is empty");
  return out;
}

/// Learner flags shared by train and maze-explore.
struct HyperFlags {
  std::string alpha_mode;
  std::string hidden;
  bool no_squash = false;

  void add(CLI::App* cmd, dac::agent::DacHyper& h) {
    cmd->add_option("--alpha-mode", alpha_mode, "fixed or adaptive");
    cmd->add_option("--alpha", h.alpha, "mixture weight in fixed mode");
    cmd->add_option("--beta", h.beta, "entropy weight");
    cmd->add_option("--gamma", h.gamma, "discount factor");
    cmd->add_option("--lr", h.learning_rate, "Adam learning rate");
    cmd->add_option("--batch", h.batch_size, "minibatch size");
    cmd->add_option("--tau", h.tau, "target smoothing coefficient");
    cmd->add_option("--horizon", h.horizon, "episode length limit");
    cmd->add_option("--hidden", hidden, "comma-separated hidden layer widths");
    cmd->add_option("--window", h.window, "sample minibatches from the newest N transitions (0 = all)");
    cmd->add_option("--ratio-clip", h.ratio_clip, "ratio clip epsilon");
    cmd->add_option("--clip-bound", h.clip_bound, "bound on the buffer term of the value target (<0 = action dim)");
    cmd->add_option("--control", h.control_coefficient, "alpha-adaptation coefficient c (default -2 dim A)");
    cmd->add_option("--alpha-min", h.alpha_min, "lower end of the adaptive alpha range");
    cmd->add_option("--alpha-max", h.alpha_max, "upper end of the adaptive alpha range");
    cmd->add_option("--alpha-reg", h.alpha_reg, "L2 weight on the alpha network");
    cmd->add_option("--buffer-capacity", h.buffer_capacity, "replay capacity");
    cmd->add_flag("--no-squash", no_squash, "use an unsquashed Gaussian with clamped actions");
  }

  void apply(dac::agent::DacHyper& h) const {
    if (!alpha_mode.empty()) h.alpha_mode = dac::agent::parse_alpha_mode(alpha_mode);
    if (!hidden.empty()) h.hidden = parse_list<int>(hidden, "--hidden");
    if (no_squash) h.squash = false;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diversity actor-critic experiments and verification"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "key=value file with defaults for the subcommand's options");

  // tabular-dpi
  dac::harness::TabularDpiOptions dpi;
  std::string dpi_mode = "exact";
  auto* tab = app.add_subcommand("tabular-dpi", "diverse policy iteration on a finite MDP");
  tab->add_option("--config", config_file);
  tab->add_option("--mdp", dpi.mdp_file, "MDP text file (omit to generate one)");
  tab->add_option("--states", dpi.gen_states, "generated MDP: number of states");
  tab->add_option("--actions", dpi.gen_actions, "generated MDP: number of actions");
  tab->add_option("--gamma", dpi.gen_gamma, "generated MDP: discount factor");
  tab->add_option("--seed", dpi.seed, "generator seed");
  tab->add_option("--buffer", dpi.buffer, "buffer distribution: uniform or random");
  tab->add_option("--alpha", dpi.dpi.alpha, "mixture weight");
  tab->add_option("--beta", dpi.dpi.beta, "entropy weight");
  tab->add_option("--mode", dpi_mode, "improvement: exact or closed-form");
  tab->add_option("--tol", dpi.dpi.tol, "stop when the policy changes less than this");
  tab->add_option("--max-iters", dpi.dpi.max_iters, "iteration limit");
  tab->add_option("--trace", dpi.trace_out, "trace CSV path");

  // toy
  dac::harness::ToyOptions toy;
  auto* toy_cmd = app.add_subcommand("toy", "one-step toy problem with one unseen action");
  toy_cmd->add_option("--config", config_file);
  toy_cmd->add_option("--actions", toy.n_actions, "number of actions N");
  toy_cmd->add_flag("--continuous", toy.continuous, "also train the neural agent on the continuous analog");
  toy_cmd->add_option("--gradient-steps", toy.gradient_steps, "gradient steps for the continuous analog");
  toy_cmd->add_option("--seed", toy.seed, "seed for the continuous analog");

  // maze-explore
  dac::harness::MazeExploreOptions maze;
  HyperFlags maze_flags;
  std::string maze_seeds = "1", maze_alphas = "0.5,1,0", maze_checkpoints = "5000,50000,300000";
  auto* mz = app.add_subcommand("maze-explore", "pure-exploration maze sweep");
  mz->add_option("--config", config_file);
  mz->add_option("--seeds", maze_seeds, "seeds, e.g. 1-10 or 1,3,5");
  mz->add_option("--alphas", maze_alphas, "agent variants by alpha");
  mz->add_option("--steps", maze.steps, "environment steps per run (300000 for the full budget)");
  mz->add_option("--checkpoints", maze_checkpoints, "steps at which histograms are written");
  mz->add_option("--log-interval", maze.log_interval, "steps between metric records");
  mz->add_option("--out", maze.out_dir, "output directory");
  mz->add_option("--jobs", maze.jobs, "seeds run concurrently");
  maze_flags.add(mz, maze.hyper);

  // train
  dac::harness::TrainOptions train;
  HyperFlags train_flags;
  bool no_checkpoint = false;
  auto* tr = app.add_subcommand("train", "train the agent on one environment");
  tr->add_option("--config", config_file);
  tr->add_option("--env", train.env, "maze, chain, delayed-chain, sparse-chain or continuous-toy");
  tr->add_option("--steps", train.steps, "environment steps");
  tr->add_option("--log-interval", train.log_interval, "steps between metric records");
  tr->add_option("--eval-episodes", train.eval_episodes, "deterministic evaluation episodes per record");
  tr->add_option("--delay", train.delay, "reward delay for delayed-chain");
  tr->add_option("--seed", train.seed, "seed");
  tr->add_option("--out", train.out_dir, "output directory");
  tr->add_flag("--no-checkpoint", no_checkpoint, "skip the final checkpoint");
  train_flags.add(tr, train.hyper);

  // verify
  dac::verify::SuiteOptions vopt;
  std::string criteria, inject;
  auto* vf = app.add_subcommand("verify", "run the verification suites");
  vf->add_option("--config", config_file);
  vf->add_option("--criterion", criteria, "comma-separated suite numbers (default: all)");
  vf->add_option("--inject", inject, "deliberate defect: ratio-sign-flip or drop-value-clip");
  vf->add_option("--seed", vopt.seed, "base seed");
  vf->add_option("--exploration-scale", vopt.exploration_scale, "fraction of the exploration step budget");
  vf->add_option("--exploration-seeds", vopt.exploration_seeds, "paired seeds in the exploration comparison");
  vf->add_option("--jobs", vopt.jobs, "threads for the exploration comparison");
  vf->add_option("--scratch", vopt.scratch_dir, "directory for suite outputs");

  try {
    const std::set<std::string> names{"tabular-dpi", "toy", "maze-explore", "train", "verify"};
    std::vector<std::string> args = expand_config(argc, argv, names);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*tab) {
      if (dpi_mode == "exact") {
        dpi.dpi.improvement_mode = dac::dpi::ImprovementMode::exact_simplex;
      } else if (dpi_mode == "closed-form") {
        dpi.dpi.improvement_mode = dac::dpi::ImprovementMode::closed_form;
      } else {
        throw ConfigError("--mode must be exact or closed-form");
      }
      const auto outcome = dac::harness::cmd_tabular_dpi(dpi, std::cout);
      return outcome.monotone ? kExitOk : kExitFailure;
    }
    if (*toy_cmd) {
      dac::harness::cmd_toy(toy, std::cout);
      return kExitOk;
    }
    if (*mz) {
      maze_flags.apply(maze.hyper);
      maze.seeds = dac::harness::parse_seed_list(maze_seeds);
      maze.alphas = parse_list<double>(maze_alphas, "--alphas");
      maze.checkpoints = parse_list<long long>(maze_checkpoints, "--checkpoints");
      dac::harness::cmd_maze_explore(maze, std::cout);
      return kExitOk;
    }
    if (*tr) {
      train_flags.apply(train.hyper);
      train.save_checkpoint = !no_checkpoint;
      dac::harness::cmd_train(train, std::cout);
      return kExitOk;
    }
    if (*vf) {
      if (inject == "ratio-sign-flip") {
        vopt.faults.flip_ratio_grad_sign = true;
      } else if (inject == "drop-value-clip") {
        vopt.faults.drop_value_clip = true;
      } else if (!inject.empty()) {
        throw ConfigError("--inject must be ratio-sign-flip or drop-value-clip");
      }
      std::set<int> selected;
      if (!criteria.empty()) {
        for (int id : parse_list<int>(criteria, "--criterion")) selected.insert(id);
      }
      bool all_passed = true;
      int ran = 0;
      for (const auto& suite : dac::verify::all_suites()) {
        if (!selected.empty() && !selected.count(suite.id)) continue;
        const auto result = dac::verify::run_timed(suite, vopt);
        std::cout << dac::verify::format_result_line(suite.id, result) << std::endl;
        all_passed = all_passed && result.passed;
        ++ran;
      }
      if (ran == 0) throw ConfigError("no suite matches --criterion " + criteria);
      return all_passed ? kExitOk : kExitFailure;
    }
  } catch (const dac::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}
