#pragma once

#include "dac/agent/config.hpp"
#include "dac/nn/checkpoint.hpp"
#include "dac/nn/ema.hpp"
#include "dac/nn/gaussian_policy.hpp"

namespace dac::agent {

/// State-dependent mixture weight alpha(s) = lo + (hi - lo) * sigmoid(z(s)),
/// where z is a linear-output network.
class AlphaHead {
 public:
  AlphaHead() = default;
  AlphaHead(nn::Mlp net, double lo, double hi);

  RowVec alpha(const Mat& states) const;
  /// Also returns d alpha / d z per sample and records the forward pass.
  RowVec alpha(const Mat& states, nn::ForwardCache& cache, RowVec& d_alpha_d_z) const;

  nn::Mlp& net() { return net_; }
  const nn::Mlp& net() const { return net_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  nn::Mlp net_;
  double lo_ = 0.5;
  double hi_ = 0.99;
};

struct DacNetworks {
  nn::GaussianPolicy policy;
  nn::Mlp ratio;  // (s, a) -> (0, 1), sigmoid output
  nn::Mlp q1;
  nn::Mlp q2;
  nn::Mlp value;
  nn::Mlp value_target;  // evaluated with the EMA shadow of `value`
  nn::EmaTracker value_ema;
  AlphaHead alpha;        // adaptive mode only
  bool has_alpha = false;

  static DacNetworks create(int state_dim, int action_dim, double action_bound, const DacHyper& hyper,
                            nn::Rng& rng);

  int state_dim() const { return policy.state_dim(); }
  int action_dim() const { return policy.action_dim(); }

  /// Copies the EMA shadow into value_target.
  void sync_target() { value_target.params() = value_ema.shadow(); }

  void save(nn::Checkpoint& cp) const;
  void load(const nn::Checkpoint& cp);
};

/// Stack states over actions for the (s, a) networks.
Mat state_action(const Mat& states, const Mat& actions);

}  // namespace dac::agent
