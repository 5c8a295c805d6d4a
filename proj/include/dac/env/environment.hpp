#pragma once

#include "dac/common.hpp"

#include <functional>
#include <memory>
#include <string>

namespace dac::env {

struct StepResult {
  Vec next_state;
  double reward = 0.0;
  bool terminal = false;   // true end of the task; no bootstrapping past it
  bool truncated = false;  // horizon reached; the state is not terminal
};

/// Continuous-action episodic environment with actions in [-action_bound, action_bound]^d.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual Vec reset() = 0;
  virtual StepResult step(const Vec& action) = 0;

  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual double action_bound() const { return 1.0; }
  virtual std::string name() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
};

using EnvPtr = std::unique_ptr<Environment>;

/// Accumulates rewards and releases the running sum once every `delay` steps.
/// Whatever remains when the episode ends is released on the final step.
class DelayedReward final : public Environment {
 public:
  DelayedReward(EnvPtr base, int delay);

  Vec reset() override;
  StepResult step(const Vec& action) override;
  int state_dim() const override { return base_->state_dim(); }
  int action_dim() const override { return base_->action_dim(); }
  double action_bound() const override { return base_->action_bound(); }
  std::string name() const override;
  EnvPtr clone() const override;

 private:
  EnvPtr base_;
  int delay_;
  int since_release_ = 0;
  double pending_ = 0.0;
};

using TransitionPredicate = std::function<bool(const Vec& state, const Vec& action, const Vec& next_state)>;

/// Replaces the base reward with 1 when the predicate holds and 0 otherwise.
class SparseThreshold final : public Environment {
 public:
  SparseThreshold(EnvPtr base, TransitionPredicate predicate, std::string label = "predicate");

  Vec reset() override;
  StepResult step(const Vec& action) override;
  int state_dim() const override { return base_->state_dim(); }
  int action_dim() const override { return base_->action_dim(); }
  double action_bound() const override { return base_->action_bound(); }
  std::string name() const override;
  EnvPtr clone() const override;

 private:
  EnvPtr base_;
  TransitionPredicate predicate_;
  std::string label_;
  Vec state_;
};

/// Clamp every coordinate of `action` into [-bound, bound].
Vec clamp_action(const Vec& action, double bound);

}  // namespace dac::env
