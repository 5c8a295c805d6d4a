#pragma once

#include "dac/common.hpp"
#include "dac/sample_entropy.hpp"

#include <iosfwd>
#include <string>

namespace dac {

/// Dense finite MDP. Transition probabilities are stored per (state, action)
/// row: transition(s * n_actions + a, s') = P(s' | s, a).
struct FiniteMdp {
  int n_states = 0;
  int n_actions = 0;
  Mat transition;  // (n_states * n_actions) x n_states
  Mat reward;      // n_states x n_actions
  double gamma = 0.0;
  Vec initial_state_dist;

  FiniteMdp() = default;
  FiniteMdp(int states, int actions, double discount);

  double p(int s, int a, int next) const { return transition(row(s, a), next); }
  Eigen::Index row(int s, int a) const { return static_cast<Eigen::Index>(s) * n_actions + a; }

  void validate() const;
};

/// Per-state probability rows over actions. Used both for policies and for
/// the replay buffer's action distribution.
struct TabularDistribution {
  Mat probs;  // n_states x n_actions

  TabularDistribution() = default;
  explicit TabularDistribution(Mat p) : probs(std::move(p)) {}

  static TabularDistribution uniform(int n_states, int n_actions);

  Vec row(int s) const { return probs.row(s).transpose(); }
  int n_states() const { return static_cast<int>(probs.rows()); }
  int n_actions() const { return static_cast<int>(probs.cols()); }
  void validate(const std::string& what) const;
};

using TabularPolicy = TabularDistribution;
using TabularActionDistribution = TabularDistribution;

using QTable = Mat;  // n_states x n_actions

/// Weighting and scale of the sample-aware entropy bonus.
struct EntropyWeights {
  double alpha = 0.5;
  double beta = 1.0;
};

/// V(s) = E_pi[Q(s,.)] + H(alpha pi(.|s) + (1 - alpha) q(.|s)).
double diverse_state_value(const QTable& q_table, const TabularPolicy& pi,
                           const TabularActionDistribution& q, double alpha, int s);

/// Same value computed through the closed-form ratio function:
///   E_pi[Q + alpha log R - alpha log alpha pi] + (1 - alpha) E_q[log R - log alpha pi].
double diverse_state_value_ratio_form(const QTable& q_table, const TabularPolicy& pi,
                                      const TabularActionDistribution& q, double alpha, int s);

/// One application of the diverse Bellman operator:
///   (T Q)(s,a) = r(s,a) / beta + gamma E_{s'}[V(s')]
/// with V evaluated in ratio form.
QTable bellman_backup(const QTable& q_table, const FiniteMdp& mdp, const TabularPolicy& pi,
                      const TabularActionDistribution& q, EntropyWeights w);

/// Exact diverse Q-function of `pi` by solving the |S||A| linear system.
QTable evaluate_diverse_q(const FiniteMdp& mdp, const TabularPolicy& pi,
                          const TabularActionDistribution& q, EntropyWeights w);

/// Text format:
///   S A gamma
///   T s a s' p      (one line per nonzero transition probability)
///   R s a r         (one line per state-action pair)
///   I s p           (optional; initial distribution, defaults to uniform)
/// Blank lines and lines starting with '#' are ignored.
FiniteMdp read_finite_mdp(std::istream& in);
FiniteMdp load_finite_mdp(const std::string& path);
void write_finite_mdp(std::ostream& out, const FiniteMdp& mdp);
void save_finite_mdp(const std::string& path, const FiniteMdp& mdp);

}  // namespace dac
