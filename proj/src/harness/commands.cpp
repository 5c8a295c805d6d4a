#include "dac/harness/commands.hpp"

#include "dac/agent/training.hpp"
#include "dac/env/maze.hpp"
#include "dac/env/simple.hpp"
#include "dac/harness/csv.hpp"
#include "dac/nn/checkpoint.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace dac::harness {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

unsigned long long parse_unsigned(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ConfigError("not a seed: '" + text + "'");
  return v;
}

double mass_on_unseen_bin(const agent::DacAgent& dac, const env::ContinuousToy& toy, nn::Rng& rng) {
  constexpr int kDraws = 20000;
  const Vec state = Vec::Zero(1);
  int hits = 0;
  for (int i = 0; i < kDraws; ++i) {
    if (toy.bin_of(dac.act(state, rng)[0]) == toy.n_actions() - 1) ++hits;
  }
  return static_cast<double>(hits) / kDraws;
}

double train_on_toy_buffer(const env::ContinuousToy& toy, double alpha, const ToyOptions& options) {
  agent::DacHyper hyper;
  hyper.alpha = alpha;
  hyper.pin_ratio_to_one = alpha == 1.0;
  hyper.hidden = {32, 32};
  hyper.batch_size = 64;
  hyper.gamma = 0.0;
  hyper.horizon = 1;
  nn::Rng rng(options.seed);
  agent::DacAgent dac(1, 1, 1.0, hyper, rng);
  // The buffer is never extended: q stays the fixed distribution over the
  // seen bins, as in the tabular problem.
  const ReplayBuffer buffer = toy.preloaded_buffer(options.samples_per_bin);
  for (long long k = 0; k < options.gradient_steps; ++k) dac.train_step(buffer, rng);
  return mass_on_unseen_bin(dac, toy, rng);
}

env::EnvPtr make_env(const TrainOptions& options) {
  const int horizon = options.hyper.horizon;
  const std::string& name = options.env;
  if (name == "maze") {
    env::MazeConfig cfg;
    cfg.horizon = horizon;
    return std::make_unique<env::Maze>(cfg);
  }
  if (name == "chain") return std::make_unique<env::Chain>(20.0, horizon);
  if (name == "delayed-chain") {
    if (options.delay < 1) throw ConfigError("delay must be at least 1");
    return std::make_unique<env::DelayedReward>(std::make_unique<env::Chain>(20.0, horizon), options.delay);
  }
  if (name == "sparse-chain") {
    auto reached_end = [](const Vec&, const Vec&, const Vec& next) { return next[0] >= 20.0; };
    return std::make_unique<env::SparseThreshold>(std::make_unique<env::Chain>(20.0, horizon), reached_end,
                                                  "end-reached");
  }
  if (name == "continuous-toy") return std::make_unique<env::ContinuousToy>(10);
  throw ConfigError("unknown environment '" + name +
                    "' (expected maze, chain, delayed-chain, sparse-chain or continuous-toy)");
}

void write_metric_row(std::ostream& out, const agent::TrainingRecord& r) {
  const agent::LossValues& m = r.metrics;
  write_csv_row(out, {std::to_string(r.step), format_double(r.episode_return), format_double(m.loss_q1),
                      format_double(m.loss_q2), format_double(m.loss_v), format_double(m.obj_pi),
                      format_double(m.obj_ratio), format_double(m.mean_alpha), format_double(m.mean_entropy),
                      format_double(m.mean_js_div), format_double(m.buffer_term_min),
                      format_double(m.buffer_term_max), std::to_string(r.gradient_steps)});
}

/// Trains every variant for one seed, writing into `<out>/seed_<n>/`.
std::map<std::string, int> explore_one_seed(const MazeExploreOptions& options, unsigned long long seed) {
  const fs::path dir = fs::path(options.out_dir) / ("seed_" + std::to_string(seed));
  std::ofstream records = open_output(dir / "exploration.csv");
  records << schema_line("experiment-record") << '\n';
  write_csv_row(records, {"run_id", "seed", "step", "metric", "value"});

  std::map<std::string, int> finals;
  if (options.steps == 0) return finals;

  env::MazeConfig maze_cfg;
  maze_cfg.horizon = options.hyper.horizon;
  for (double alpha : options.alphas) {
    const std::string run_id = maze_run_id(alpha);
    agent::DacHyper hyper = options.hyper;
    hyper.alpha_mode = agent::AlphaMode::fixed;
    hyper.alpha = alpha;
    hyper.pin_ratio_to_one = alpha == 1.0;

    nn::Rng rng(seed);
    env::Maze maze(maze_cfg);
    agent::DacAgent dac(maze.state_dim(), maze.action_dim(), maze.action_bound(), hyper, rng);
    ReplayBuffer buffer(hyper.buffer_capacity);
    env::VisitationGrid grid = env::VisitationGrid::for_maze(maze_cfg);
    grid.record(maze.reset());

    auto on_step = [&](long long step, const Vec& next_state) {
      grid.record(next_state);
      if (std::find(options.checkpoints.begin(), options.checkpoints.end(), step) == options.checkpoints.end()) {
        return;
      }
      const std::string stem = "hist_" + run_id + "_step" + std::to_string(step);
      std::ofstream csv = open_output(dir / (stem + ".csv"));
      grid.write_csv(csv);
      std::ofstream pgm = open_output(dir / (stem + ".pgm"));
      grid.write_pgm(pgm);
    };
    auto on_record = [&](const agent::TrainingRecord& r) {
      const std::string s = std::to_string(seed), t = std::to_string(r.step);
      auto row = [&](const char* metric, const std::string& value) {
        write_csv_row(records, {run_id, s, t, metric, value});
      };
      row("unique_cells", std::to_string(grid.unique_cells()));
      row("mean_js_div", format_double(r.metrics.mean_js_div));
      row("mean_entropy", format_double(r.metrics.mean_entropy));
      row("mean_alpha", format_double(r.metrics.mean_alpha));
    };

    agent::TrainingOptions topt;
    topt.total_steps = options.steps;
    topt.log_interval = options.log_interval;
    agent::run_training(maze, dac, buffer, topt, rng, on_step, on_record);
    finals[run_id] = grid.unique_cells();
  }
  return finals;
}

}  // namespace

std::vector<unsigned long long> parse_seed_list(const std::string& text) {
  std::vector<unsigned long long> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(parse_unsigned(item));
      continue;
    }
    const unsigned long long lo = parse_unsigned(item.substr(0, dash));
    const unsigned long long hi = parse_unsigned(item.substr(dash + 1));
    if (hi < lo) throw ConfigError("empty seed range '" + item + "'");
    for (unsigned long long s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw ConfigError("seed list is empty");
  auto sorted = seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("seed list repeats a seed: " + text);
  }
  return seeds;
}

TabularDpiOutcome cmd_tabular_dpi(const TabularDpiOptions& options, std::ostream& log) {
  options.dpi.validate();
  nn::Rng rng(options.seed);
  FiniteMdp mdp(1, 1, 0.0);
  if (options.mdp_file.empty()) {
    if (options.gen_states < 1 || options.gen_actions < 1) throw ConfigError("generator sizes must be positive");
    mdp = env::random_finite_mdp(options.gen_states, options.gen_actions, options.gen_gamma, rng);
  } else {
    try {
      mdp = load_finite_mdp(options.mdp_file);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }

  TabularActionDistribution q;
  if (options.buffer == "uniform") {
    q = TabularActionDistribution::uniform(mdp.n_states, mdp.n_actions);
  } else if (options.buffer == "random") {
    q = env::random_distribution(mdp.n_states, mdp.n_actions, rng);
  } else {
    throw ConfigError("buffer distribution must be 'uniform' or 'random'");
  }

  TabularDpiOutcome outcome;
  const TabularPolicy pi0 = TabularPolicy::uniform(mdp.n_states, mdp.n_actions);
  try {
    outcome.trace = dpi::run_dpi(mdp, q, options.dpi, pi0);
  } catch (const dpi::MonotonicityViolation& e) {
    outcome.monotone = false;
    outcome.violation = e.what();
  }

  if (!options.trace_out.empty()) {
    std::ofstream out = open_output(options.trace_out);
    dpi::write_trace_csv(out, outcome.trace);
  }
  if (!outcome.monotone) {
    log << "monotonicity violated: " << outcome.violation << '\n';
    return outcome;
  }
  const auto& last = outcome.trace.iterations.back();
  log << "states " << mdp.n_states << ", actions " << mdp.n_actions << ", gamma " << format_double(mdp.gamma)
      << '\n'
      << "iterations " << outcome.trace.iterations.size() << ", converged "
      << (outcome.trace.converged ? "yes" : "no") << ", monotone yes\n"
      << "final J:";
  for (Eigen::Index s = 0; s < last.j.size(); ++s) log << ' ' << format_double(last.j[s]);
  log << '\n';
  return outcome;
}

ToyOutcome cmd_toy(const ToyOptions& options, std::ostream& log) {
  if (options.n_actions < 2) throw ConfigError("the toy needs at least two actions");
  ToyOutcome outcome;
  outcome.tabular = dpi::toy_example(options.n_actions);
  const dpi::ToyResult& t = outcome.tabular;
  const int n = options.n_actions;
  log << "actions " << n << ", alpha " << format_double(t.alpha) << '\n'
      << "sample-aware policy mass on unseen action A_" << n << ": " << format_double(t.dac_policy[n - 1]) << '\n'
      << "expected steps to try A_" << n << ": sample-aware " << format_double(t.dac_expected_steps)
      << ", uniform " << format_double(t.uniform_expected_steps) << '\n';

  outcome.dac_unseen_mass = std::numeric_limits<double>::quiet_NaN();
  outcome.sac_unseen_mass = std::numeric_limits<double>::quiet_NaN();
  if (options.continuous) {
    const env::ContinuousToy toy(n);
    outcome.dac_unseen_mass = train_on_toy_buffer(toy, 1.0 / n, options);
    outcome.sac_unseen_mass = train_on_toy_buffer(toy, 1.0, options);
    log << "continuous analog after " << options.gradient_steps << " gradient steps, mass on unseen bin: DAC "
        << format_double(outcome.dac_unseen_mass) << ", alpha=1 " << format_double(outcome.sac_unseen_mass)
        << " (bin width 1/" << n << ")\n";
  }
  return outcome;
}

agent::DacHyper default_maze_hyper() {
  agent::DacHyper h;
  h.gamma = 0.999;
  h.horizon = 1000;
  h.hidden = {64, 64};
  h.batch_size = 64;
  // Map the 100 x 100 arena onto [-1, 1]^2.
  h.state_shift = 50.0;
  h.state_scale = 0.02;
  return h;
}

std::string maze_run_id(double alpha) {
  std::ostringstream ss;
  ss << "alpha" << alpha;
  return ss.str();
}

MazeExploreOutcome cmd_maze_explore(const MazeExploreOptions& options, std::ostream& log) {
  if (options.seeds.empty()) throw ConfigError("maze-explore needs at least one seed");
  if (options.steps < 0) throw ConfigError("steps must be nonnegative");
  if (options.log_interval <= 0) throw ConfigError("log interval must be positive");
  if (options.jobs < 1) throw ConfigError("jobs must be at least 1");
  if (options.alphas.empty()) throw ConfigError("maze-explore needs at least one alpha");
  for (double a : options.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("alpha variants must lie in [0, 1]");
  }
  agent::DacHyper check = options.hyper;
  check.alpha_mode = agent::AlphaMode::fixed;
  check.validate();

  const std::size_t n = options.seeds.size();
  std::vector<std::map<std::string, int>> per_seed(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        per_seed[i] = explore_one_seed(options, options.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
        continue;
      }
      std::lock_guard<std::mutex> lock(log_mutex);
      log << "seed " << options.seeds[i];
      for (const auto& [id, cells] : per_seed[i]) log << "  " << id << "=" << cells;
      log << '\n';
    }
  };
  const int threads = static_cast<int>(std::min<std::size_t>(options.jobs, n));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  MazeExploreOutcome outcome;
  std::ofstream summary = open_output(fs::path(options.out_dir) / "summary.csv");
  summary << schema_line("maze-summary") << '\n';
  write_csv_row(summary, {"run_id", "seed", "unique_cells"});
  for (double alpha : options.alphas) {
    const std::string id = maze_run_id(alpha);
    auto& cells = outcome.unique_cells[id];
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = per_seed[i].find(id);
      if (it == per_seed[i].end()) continue;
      cells.push_back(it->second);
      write_csv_row(summary, {id, std::to_string(options.seeds[i]), std::to_string(it->second)});
    }
    if (!cells.empty()) {
      double mean = 0.0;
      for (int c : cells) mean += c;
      log << id << ": mean unique cells " << format_double(mean / cells.size()) << " over " << cells.size()
          << " seeds\n";
    }
  }
  return outcome;
}

const std::vector<std::string>& training_metric_columns() {
  static const std::vector<std::string> columns{
      "step",     "episode_return", "loss_q1",         "loss_q2",         "loss_v",
      "obj_pi",   "obj_ratio",      "mean_alpha",      "mean_entropy",    "mean_js_div",
      "buffer_term_min", "buffer_term_max", "gradient_steps"};
  return columns;
}

TrainOutcome cmd_train(const TrainOptions& options, std::ostream& log) {
  if (options.steps < 0) throw ConfigError("steps must be nonnegative");
  if (options.log_interval <= 0) throw ConfigError("log interval must be positive");
  try {
    options.hyper.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  env::EnvPtr env = make_env(options);
  nn::Rng rng(options.seed);
  agent::DacAgent dac(env->state_dim(), env->action_dim(), env->action_bound(), options.hyper, rng);
  ReplayBuffer buffer(options.hyper.buffer_capacity);

  const fs::path dir(options.out_dir);
  std::ofstream metrics = open_output(dir / "metrics.csv");
  metrics << schema_line("training-metrics") << '\n';
  write_csv_row(metrics, training_metric_columns());

  TrainOutcome outcome;
  agent::TrainingOptions topt;
  topt.total_steps = options.steps;
  topt.log_interval = options.log_interval;
  topt.eval_episodes = options.eval_episodes;
  auto on_record = [&](const agent::TrainingRecord& r) {
    write_metric_row(metrics, r);
    ++outcome.records;
    outcome.final_return = r.episode_return;
  };
  agent::run_training(*env, dac, buffer, topt, rng, {}, on_record);
  metrics.flush();

  if (options.save_checkpoint) {
    nn::Checkpoint cp;
    dac.save(cp);
    cp.save((dir / "checkpoint").string());
  }
  log << options.env << ": " << options.steps << " steps, " << outcome.records << " records, last return "
      << format_double(outcome.final_return) << '\n';
  return outcome;
}

}  // namespace dac::harness
