#pragma once

#include "dac/common.hpp"

#include <cmath>

namespace dac::nn {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. `descend` moves parameters against the gradient;
/// objectives that are maximized pass their ascent gradient to `ascend`.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index n_params, AdamConfig config)
      : cfg_(config), m_(Vec::Zero(n_params)), v_(Vec::Zero(n_params)) {}

  void descend(Vec& params, const Vec& grad) { apply(params, grad, -1.0); }
  void ascend(Vec& params, const Vec& grad) { apply(params, grad, 1.0); }

  long long steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  const Vec& first_moment() const { return m_; }
  const Vec& second_moment() const { return v_; }
  void restore(long long steps, Vec m, Vec v) {
    require(m.size() == m_.size() && v.size() == v_.size(), "optimizer state shape mismatch");
    t_ = steps;
    m_ = std::move(m);
    v_ = std::move(v);
  }

 private:
  void apply(Vec& params, const Vec& grad, double sign) {
    require(params.size() == m_.size() && grad.size() == m_.size(), "optimizer shape mismatch");
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    const double step = cfg_.learning_rate / c1;
    params.array() += sign * step * m_.array() / ((v_.array() / c2).sqrt() + cfg_.epsilon);
  }

  AdamConfig cfg_;
  Vec m_;
  Vec v_;
  long long t_ = 0;
};

}  // namespace dac::nn
