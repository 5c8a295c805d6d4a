#pragma once

#include "dac/common.hpp"

namespace dac::nn {

/// Exponential moving average of a parameter vector, used for target networks.
class EmaTracker {
 public:
  EmaTracker() = default;
  EmaTracker(Vec initial, double tau) : shadow_(std::move(initial)), tau_(tau) {
    require(tau >= 0.0 && tau <= 1.0, "EMA coefficient must lie in [0, 1]");
  }

  /// shadow <- (1 - tau) * shadow + tau * source
  void update(const Vec& source) {
    require(source.size() == shadow_.size(), "EMA source shape does not match the shadow");
    shadow_ = (1.0 - tau_) * shadow_ + tau_ * source;
  }

  const Vec& shadow() const { return shadow_; }
  Vec& shadow() { return shadow_; }
  double tau() const { return tau_; }

 private:
  Vec shadow_;
  double tau_ = 0.005;
};

}  // namespace dac::nn
