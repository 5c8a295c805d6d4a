#pragma once

#include "dac/agent/dac_agent.hpp"
#include "dac/env/environment.hpp"

#include <functional>
#include <vector>

namespace dac::agent {

struct TrainingOptions {
  long long total_steps = 0;
  long long log_interval = 1000;
  /// Deterministic evaluation episodes run at every record; 0 reports the
  /// return of the latest finished training episode instead.
  int eval_episodes = 0;
  /// Gradient steps begin once the buffer holds this many transitions;
  /// negative means "one minibatch".
  long long learning_starts = -1;
};

/// Metrics averaged over the gradient steps since the previous record.
struct TrainingRecord {
  long long step = 0;
  double episode_return = 0.0;
  LossValues metrics;
  long long gradient_steps = 0;
};

using EnvStepCallback = std::function<void(long long step, const Vec& next_state)>;
using RecordCallback = std::function<void(const TrainingRecord&)>;

/// Alternates one environment step with one gradient step. Episodes end on a
/// terminal state, on environment truncation, or after hyper().horizon steps.
std::vector<TrainingRecord> run_training(env::Environment& env, DacAgent& agent, ReplayBuffer& buffer,
                                         const TrainingOptions& options, nn::Rng& rng,
                                         const EnvStepCallback& on_step = {}, const RecordCallback& on_record = {});

/// Mean undiscounted return of the squashed-mean policy over `episodes` runs.
double evaluate_deterministic(const env::Environment& prototype, const DacAgent& agent, int episodes);

}  // namespace dac::agent
