#include "dac/env/environment.hpp"

namespace dac::env {

Vec clamp_action(const Vec& action, double bound) { return action.cwiseMax(-bound).cwiseMin(bound); }

DelayedReward::DelayedReward(EnvPtr base, int delay) : base_(std::move(base)), delay_(delay) {
  require(base_ != nullptr, "delayed-reward wrapper needs a base environment");
  require(delay >= 1, "reward delay must be at least 1");
}

Vec DelayedReward::reset() {
  since_release_ = 0;
  pending_ = 0.0;
  return base_->reset();
}

StepResult DelayedReward::step(const Vec& action) {
  StepResult r = base_->step(action);
  pending_ += r.reward;
  ++since_release_;
  if (since_release_ == delay_ || r.terminal || r.truncated) {
    r.reward = pending_;
    pending_ = 0.0;
    since_release_ = 0;
  } else {
    r.reward = 0.0;
  }
  return r;
}

std::string DelayedReward::name() const { return "delayed(" + base_->name() + "," + std::to_string(delay_) + ")"; }

EnvPtr DelayedReward::clone() const {
  auto copy = std::make_unique<DelayedReward>(base_->clone(), delay_);
  copy->since_release_ = since_release_;
  copy->pending_ = pending_;
  return copy;
}

SparseThreshold::SparseThreshold(EnvPtr base, TransitionPredicate predicate, std::string label)
    : base_(std::move(base)), predicate_(std::move(predicate)), label_(std::move(label)) {
  require(base_ != nullptr, "sparse-reward wrapper needs a base environment");
  require(static_cast<bool>(predicate_), "sparse-reward wrapper needs a predicate");
}

Vec SparseThreshold::reset() {
  state_ = base_->reset();
  return state_;
}

StepResult SparseThreshold::step(const Vec& action) {
  StepResult r = base_->step(action);
  r.reward = predicate_(state_, action, r.next_state) ? 1.0 : 0.0;
  state_ = r.next_state;
  return r;
}

std::string SparseThreshold::name() const { return "sparse(" + base_->name() + "," + label_ + ")"; }

EnvPtr SparseThreshold::clone() const {
  auto copy = std::make_unique<SparseThreshold>(base_->clone(), predicate_, label_);
  copy->state_ = state_;
  return copy;
}

}  // namespace dac::env
