#pragma once

#include "dac/common.hpp"
#include "dac/replay.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace dac::agent {

enum class AlphaMode { fixed, adaptive };

/// Learner hyperparameters. Negative `clip_bound` means "use the action
/// dimension"; a NaN `control_coefficient` means "-2 times the action dimension".
struct DacHyper {
  AlphaMode alpha_mode = AlphaMode::fixed;
  double alpha = 0.5;  // used in fixed mode
  double beta = 1.0;
  double gamma = 0.99;
  double learning_rate = 3e-4;
  int batch_size = 256;
  double tau = 0.005;
  int horizon = 1000;
  double ratio_clip = 1e-4;
  double clip_bound = -1.0;
  double control_coefficient = std::numeric_limits<double>::quiet_NaN();
  double alpha_min = 0.5;
  double alpha_max = 0.99;
  double alpha_reg = 1e-3;
  std::vector<int> hidden = {256, 256};
  bool squash = true;
  std::size_t buffer_capacity = ReplayBuffer::kDefaultCapacity;
  /// Draw minibatches from only the newest `window` transitions; 0 disables.
  std::size_t window = 0;
  /// Replace the learned ratio with the constant 1 in every loss. Only
  /// meaningful together with alpha = 1, where it is the exact ratio.
  bool pin_ratio_to_one = false;
  /// Affine normalization applied to states before they reach any network.
  double state_shift = 0.0;
  double state_scale = 1.0;

  double effective_clip_bound(int action_dim) const { return clip_bound < 0.0 ? action_dim : clip_bound; }
  double effective_control(int action_dim) const {
    return std::isnan(control_coefficient) ? -2.0 * action_dim : control_coefficient;
  }
  void validate() const;
};

/// Deliberate defects used to confirm that the verification suites notice
/// them. Never enabled outside of tests and `dac verify --inject`.
struct FaultInjection {
  bool flip_ratio_grad_sign = false;
  bool drop_value_clip = false;
};

std::string to_string(AlphaMode mode);
AlphaMode parse_alpha_mode(const std::string& text);

}  // namespace dac::agent
