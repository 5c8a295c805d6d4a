#pragma once

#include "dac/nn/mlp.hpp"

namespace dac::nn {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

/// Everything a reparameterized draw needs for the reverse pass.
struct PolicySample {
  Mat actions;     // d x B
  RowVec log_prob; // 1 x B
  Mat noise;       // d x B, standard normal draws
  Mat mean;
  Mat log_std;     // clamped
  Mat pre_squash;  // mean + std * noise
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> log_std_active;  // false where the clamp bit
  ForwardCache cache;
};

/// Diagonal Gaussian policy head on top of an MLP producing [mean; log_std].
/// With squashing enabled, actions are scale * tanh(u) with u ~ N(mean, std^2)
/// and the log density carries the change-of-variables correction.
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(Mlp net, int action_dim, bool squash = true, double action_scale = 1.0);

  static GaussianPolicy initialized(int state_dim, int action_dim, const std::vector<int>& hidden, Rng& rng,
                                    bool squash = true, double action_scale = 1.0,
                                    double final_layer_scale = 1e-2);

  int action_dim() const { return action_dim_; }
  int state_dim() const { return net_.input_size(); }
  bool squashed() const { return squash_; }
  double action_scale() const { return scale_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  /// a = f(noise; s). `noise` is d x B.
  PolicySample sample(const Mat& states, const Mat& noise) const;

  /// Gradient with respect to the network parameters of
  ///   sum_b <d_actions_b, a_b> + d_log_prob_b * log pi(a_b | s_b)
  /// where a_b is the reparameterized action, holding the noise fixed.
  Vec backward(const PolicySample& sample, const Mat& d_actions, const RowVec& d_log_prob) const;

  /// log pi(a | s) for externally supplied actions, e.g. replayed ones.
  RowVec log_prob(const Mat& states, const Mat& actions) const;
  /// Same, reusing the mean and log-std of an existing sample on the same states.
  RowVec log_prob(const PolicySample& at_states, const Mat& actions) const;

  /// Squashed mean action.
  Mat deterministic_action(const Mat& states) const;

  static Mat standard_normal(int rows, int cols, Rng& rng);

 private:
  void split_heads(const Mat& out, Mat& mean, Mat& log_std,
                   Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& active) const;

  Mlp net_;
  int action_dim_ = 0;
  bool squash_ = true;
  double scale_ = 1.0;
};

/// log(1 - tanh(u)^2) computed without cancellation.
double log_one_minus_tanh_sq(double u);

}  // namespace dac::nn
