#pragma once

#include "dac/agent/dac_agent.hpp"
#include "dac/finite_mdp.hpp"

#include <functional>

namespace dac::verify {

/// Soft Q evaluation with the plain policy entropy bonus, by fixed-point
/// iteration. Written without the mixture machinery so it can cross-check the
/// alpha = 1 collapse.
QTable soft_q_evaluation(const FiniteMdp& mdp, const TabularPolicy& pi, double beta, int sweeps = 5000);

/// Soft policy iteration with pi <- softmax(Q) until the policy stops moving.
TabularPolicy soft_policy_iteration(const FiniteMdp& mdp, double beta, double tol = 1e-12, int max_iters = 1000);

/// Parameters of the networks an SAC step touches.
struct SacParams {
  Vec policy, q1, q2, value, value_target;
};

/// One soft actor-critic step written directly from the SAC losses, drawing
/// the minibatch and the policy noise in the order DacAgent::train_step does.
/// `nets` supplies the starting parameters; fresh Adam states are used.
SacParams independent_sac_step(const agent::DacNetworks& nets, const agent::DacHyper& hyper,
                               const ReplayBuffer& buffer, nn::Rng& rng);

/// Central finite difference of f around x along every coordinate.
Vec central_difference(const std::function<double(const Vec&)>& f, const Vec& x, double step);

/// |a - b| / max(|a|, |b|, floor) using Euclidean norms.
double relative_error(const Vec& a, const Vec& b, double floor = 1e-8);

}  // namespace dac::verify
