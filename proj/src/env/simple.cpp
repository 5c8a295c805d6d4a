#include "dac/env/simple.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dac::env {

namespace {

Vec scalar(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

Vec dirichlet_row(int n, nn::Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  Vec row(n);
  for (int i = 0; i < n; ++i) row[i] = e(rng) + 1e-12;
  return row / row.sum();
}

}  // namespace

TabularActionDistribution OneStepToy::buffer_distribution() const {
  TabularActionDistribution q = empirical_action_distribution(buffer, state_index, action_index, 2, n_actions);
  return q;
}

OneStepToy one_step_toy(int n_actions) {
  require(n_actions >= 2, "the one-step toy needs at least two actions");
  OneStepToy toy{FiniteMdp(2, n_actions, 0.0), ReplayBuffer(static_cast<std::size_t>(n_actions)), n_actions};
  for (int a = 0; a < n_actions; ++a) {
    toy.mdp.transition(toy.mdp.row(0, a), 1) = 1.0;
    toy.mdp.transition(toy.mdp.row(1, a), 1) = 1.0;
  }
  toy.mdp.initial_state_dist = Vec::Zero(2);
  toy.mdp.initial_state_dist[0] = 1.0;
  toy.mdp.validate();
  for (int a = 0; a + 1 < n_actions; ++a) {
    toy.buffer.push(Transition{scalar(0.0), scalar(a), 0.0, scalar(1.0), true});
  }
  return toy;
}

ContinuousToy::ContinuousToy(int n_actions) : n_actions_(n_actions) {
  require(n_actions >= 2, "the continuous toy needs at least two bins");
}

Vec ContinuousToy::reset() { return scalar(0.0); }

StepResult ContinuousToy::step(const Vec& action) {
  require(action.size() == 1, "continuous toy actions are scalars");
  StepResult r;
  r.next_state = scalar(0.0);
  r.terminal = true;
  return r;
}

int ContinuousToy::bin_of(double action) const {
  const double a = std::clamp(action, -1.0, 1.0);
  const int bin = static_cast<int>(std::floor((a + 1.0) / 2.0 * n_actions_));
  return std::min(bin, n_actions_ - 1);
}

double ContinuousToy::unseen_lower_edge() const { return -1.0 + 2.0 * (n_actions_ - 1) / n_actions_; }

ReplayBuffer ContinuousToy::preloaded_buffer(int samples_per_bin) const {
  require(samples_per_bin >= 1, "need at least one sample per bin");
  const int total = samples_per_bin * (n_actions_ - 1);
  ReplayBuffer buf(static_cast<std::size_t>(total));
  const double width = unseen_lower_edge() + 1.0;
  for (int i = 0; i < total; ++i) {
    const double a = -1.0 + width * (i + 0.5) / total;
    buf.push(Transition{scalar(0.0), scalar(a), 0.0, scalar(0.0), true});
  }
  return buf;
}

Chain::Chain(double length, int horizon) : length_(length), horizon_(horizon) {
  require(length > 0.0 && horizon > 0, "chain length and horizon must be positive");
}

Vec Chain::reset() {
  x_ = 0.0;
  t_ = 0;
  return scalar(x_);
}

StepResult Chain::step(const Vec& action) {
  require(action.size() == 1, "chain actions are scalars");
  const double before = x_;
  x_ = std::clamp(x_ + std::clamp(action[0], -1.0, 1.0), 0.0, length_);
  ++t_;
  StepResult r;
  r.next_state = scalar(x_);
  r.reward = x_ - before;
  r.terminal = x_ >= length_;
  r.truncated = !r.terminal && t_ >= horizon_;
  return r;
}

FiniteMdp random_finite_mdp(int n_states, int n_actions, double gamma, nn::Rng& rng) {
  FiniteMdp mdp(n_states, n_actions, gamma);
  std::uniform_real_distribution<double> reward(-1.0, 1.0);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      mdp.transition.row(mdp.row(s, a)) = dirichlet_row(n_states, rng).transpose();
      mdp.reward(s, a) = reward(rng);
    }
  }
  mdp.validate();
  return mdp;
}

TabularDistribution random_distribution(int n_states, int n_actions, nn::Rng& rng) {
  Mat p(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) p.row(s) = dirichlet_row(n_actions, rng).transpose();
  return TabularDistribution(p);
}

}  // namespace dac::env
