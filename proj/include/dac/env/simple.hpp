#pragma once

#include "dac/env/environment.hpp"
#include "dac/finite_mdp.hpp"
#include "dac/nn/mlp.hpp"
#include "dac/replay.hpp"

namespace dac::env {

/// One-step decision problem: state s0 leads to the absorbing state s1 under
/// every action with reward 0. The buffer already holds one sample of each of
/// the first n_actions - 1 actions; the last action has never been tried.
struct OneStepToy {
  FiniteMdp mdp;
  ReplayBuffer buffer;
  int n_actions = 0;

  /// States and actions are stored as one-element vectors holding their index.
  static int state_index(const Vec& s) { return static_cast<int>(std::lround(s[0])); }
  static int action_index(const Vec& a) { return static_cast<int>(std::lround(a[0])); }
  TabularActionDistribution buffer_distribution() const;
};

OneStepToy one_step_toy(int n_actions);

/// Continuous relaxation of the one-step toy: a single state, a scalar action
/// in [-1, 1] split into n_actions equal bins, and immediate termination. The
/// preloaded buffer covers the first n_actions - 1 bins evenly, leaving the
/// top bin unseen.
class ContinuousToy final : public Environment {
 public:
  explicit ContinuousToy(int n_actions);

  Vec reset() override;
  StepResult step(const Vec& action) override;
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  std::string name() const override { return "continuous-toy"; }
  EnvPtr clone() const override { return std::make_unique<ContinuousToy>(*this); }

  int n_actions() const { return n_actions_; }
  int bin_of(double action) const;
  /// Lower edge of the never-sampled bin.
  double unseen_lower_edge() const;
  ReplayBuffer preloaded_buffer(int samples_per_bin) const;

 private:
  int n_actions_;
};

/// Walk on [0, length] starting at 0; the action moves the position by its
/// value, clamped to the ends. The reward is the distance gained, so a sparse
/// or delayed wrapper turns it into a hard exploration problem. Episodes end
/// on reaching the far end or after `horizon` steps.
class Chain final : public Environment {
 public:
  explicit Chain(double length = 20.0, int horizon = 100);

  Vec reset() override;
  StepResult step(const Vec& action) override;
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  std::string name() const override { return "chain"; }
  EnvPtr clone() const override { return std::make_unique<Chain>(*this); }

  double length() const { return length_; }

 private:
  double length_;
  int horizon_;
  double x_ = 0.0;
  int t_ = 0;
};

/// Random dense MDP: transition rows drawn from a flat Dirichlet, rewards
/// uniform on [-1, 1], uniform initial distribution.
FiniteMdp random_finite_mdp(int n_states, int n_actions, double gamma, nn::Rng& rng);

/// Random strictly positive probability rows (flat Dirichlet).
TabularDistribution random_distribution(int n_states, int n_actions, nn::Rng& rng);

}  // namespace dac::env
