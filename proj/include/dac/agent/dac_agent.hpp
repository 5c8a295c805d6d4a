#pragma once

#include "dac/agent/losses.hpp"
#include "dac/nn/adam.hpp"

namespace dac::agent {

struct StepMetrics {
  LossValues losses;
  bool trained = false;
};

/// Owns the networks and their optimizers. train_step draws its randomness
/// from the supplied generator in a fixed order: first the minibatch indices
/// (one draw per sample), then the d x M standard-normal policy noise in
/// column-major order.
class DacAgent {
 public:
  DacAgent(int state_dim, int action_dim, double action_bound, DacHyper hyper, nn::Rng& rng);

  const DacHyper& hyper() const { return hyper_; }
  DacNetworks& nets() { return nets_; }
  const DacNetworks& nets() const { return nets_; }
  FaultInjection& faults() { return faults_; }

  Vec act(const Vec& state, nn::Rng& rng) const;
  Vec act_deterministic(const Vec& state) const;

  /// One gradient step on a minibatch drawn from `buffer` (or its newest
  /// `window` entries when the window is enabled).
  StepMetrics train_step(const ReplayBuffer& buffer, nn::Rng& rng);

  /// One gradient step on a given batch and noise. Every gradient is taken at
  /// the current parameters; updates are then applied in the order policy,
  /// ratio, critics, value, target EMA, alpha.
  StepMetrics train_on_batch(const Batch& batch, const Mat& noise);

  void save(nn::Checkpoint& cp) const;
  void load(const nn::Checkpoint& cp);

 private:
  DacHyper hyper_;
  DacNetworks nets_;
  nn::Adam opt_policy_, opt_ratio_, opt_q1_, opt_q2_, opt_value_, opt_alpha_;
  FaultInjection faults_;
};

}  // namespace dac::agent
