#include "dac/agent/training.hpp"

#include <algorithm>
#include <limits>

namespace dac::agent {

namespace {

class MetricAccumulator {
 public:
  void add(const LossValues& v) {
    if (n_ == 0) {
      sum_ = v;
    } else {
      sum_.obj_pi += v.obj_pi;
      sum_.obj_ratio += v.obj_ratio;
      sum_.loss_q1 += v.loss_q1;
      sum_.loss_q2 += v.loss_q2;
      sum_.loss_v += v.loss_v;
      sum_.loss_alpha += v.loss_alpha;
      sum_.mean_alpha += v.mean_alpha;
      sum_.mean_entropy += v.mean_entropy;
      sum_.mean_js_div += v.mean_js_div;
      sum_.mean_ratio += v.mean_ratio;
      sum_.buffer_term_min = std::min(sum_.buffer_term_min, v.buffer_term_min);
      sum_.buffer_term_max = std::max(sum_.buffer_term_max, v.buffer_term_max);
    }
    ++n_;
  }

  long long count() const { return n_; }

  LossValues mean() const {
    if (n_ == 0) return {};
    LossValues m = sum_;
    const double k = static_cast<double>(n_);
    m.obj_pi /= k;
    m.obj_ratio /= k;
    m.loss_q1 /= k;
    m.loss_q2 /= k;
    m.loss_v /= k;
    m.loss_alpha /= k;
    m.mean_alpha /= k;
    m.mean_entropy /= k;
    m.mean_js_div /= k;
    m.mean_ratio /= k;
    return m;
  }

  void clear() { n_ = 0; }

 private:
  LossValues sum_;
  long long n_ = 0;
};

}  // namespace

double evaluate_deterministic(const env::Environment& prototype, const DacAgent& agent, int episodes) {
  require(episodes > 0, "evaluation needs at least one episode");
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    auto env = prototype.clone();
    Vec s = env->reset();
    for (int t = 0; t < agent.hyper().horizon; ++t) {
      const env::StepResult r = env->step(agent.act_deterministic(s));
      total += r.reward;
      if (r.terminal || r.truncated) break;
      s = r.next_state;
    }
  }
  return total / episodes;
}

std::vector<TrainingRecord> run_training(env::Environment& env, DacAgent& agent, ReplayBuffer& buffer,
                                         const TrainingOptions& options, nn::Rng& rng,
                                         const EnvStepCallback& on_step, const RecordCallback& on_record) {
  require(options.total_steps >= 0, "total steps must be nonnegative");
  require(options.log_interval > 0, "log interval must be positive");
  require(env.state_dim() == agent.nets().state_dim() && env.action_dim() == agent.nets().action_dim(),
          "environment and agent dimensions differ");
  std::vector<TrainingRecord> records;
  if (options.total_steps == 0) return records;

  const long long starts = options.learning_starts < 0 ? agent.hyper().batch_size : options.learning_starts;
  const auto prototype = env.clone();
  MetricAccumulator acc;
  Vec state = env.reset();
  double running_return = 0.0;
  double last_return = 0.0;
  bool finished_any = false;
  int episode_steps = 0;

  for (long long step = 1; step <= options.total_steps; ++step) {
    const Vec action = agent.act(state, rng);
    env::StepResult r;
    try {
      r = env.step(action);
    } catch (const std::exception& e) {
      throw NumericalError("environment " + env.name() + " failed at step " + std::to_string(step) + ": " + e.what());
    }
    ++episode_steps;
    buffer.push(Transition{state, action, r.reward, r.next_state, r.terminal});
    if (on_step) on_step(step, r.next_state);
    running_return += r.reward;
    if (r.terminal || r.truncated || episode_steps >= agent.hyper().horizon) {
      last_return = running_return;
      finished_any = true;
      running_return = 0.0;
      episode_steps = 0;
      state = env.reset();
    } else {
      state = r.next_state;
    }

    if (static_cast<long long>(buffer.size()) >= starts) acc.add(agent.train_step(buffer, rng).losses);

    if (step % options.log_interval == 0 || step == options.total_steps) {
      TrainingRecord rec;
      rec.step = step;
      rec.metrics = acc.mean();
      rec.gradient_steps = acc.count();
      if (options.eval_episodes > 0) {
        rec.episode_return = evaluate_deterministic(*prototype, agent, options.eval_episodes);
      } else {
        rec.episode_return = finished_any ? last_return : running_return;
      }
      acc.clear();
      if (on_record) on_record(rec);
      records.push_back(rec);
    }
  }
  return records;
}

}  // namespace dac::agent
