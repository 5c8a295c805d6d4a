#include "dac/nn/gaussian_policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dac::nn {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)
constexpr double kAtanhLimit = 1.0 - 1e-6;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

double log_one_minus_tanh_sq(double u) {
  return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u));
}

GaussianPolicy::GaussianPolicy(Mlp net, int action_dim, bool squash, double action_scale)
    : net_(std::move(net)), action_dim_(action_dim), squash_(squash), scale_(action_scale) {
  require(action_dim_ > 0, "policy action dimension must be positive");
  require(net_.output_size() == 2 * action_dim_, "policy network must output mean and log-std");
  require(net_.output_activation() == OutputActivation::linear, "policy network output must be linear");
  require(action_scale > 0.0, "action scale must be positive");
}

GaussianPolicy GaussianPolicy::initialized(int state_dim, int action_dim, const std::vector<int>& hidden,
                                           Rng& rng, bool squash, double action_scale,
                                           double final_layer_scale) {
  std::vector<int> sizes{state_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(2 * action_dim);
  return GaussianPolicy(Mlp::initialized(sizes, OutputActivation::linear, rng, final_layer_scale), action_dim,
                        squash, action_scale);
}

void GaussianPolicy::split_heads(const Mat& out, Mat& mean, Mat& log_std,
                                 Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& active) const {
  mean = out.topRows(action_dim_);
  const Mat raw = out.bottomRows(action_dim_);
  active = (raw.array() >= kLogStdMin) && (raw.array() <= kLogStdMax);
  log_std = raw.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

PolicySample GaussianPolicy::sample(const Mat& states, const Mat& noise) const {
  require(noise.rows() == action_dim_ && noise.cols() == states.cols(), "policy noise has the wrong shape");
  PolicySample s;
  const Mat out = net_.forward(states, s.cache);
  split_heads(out, s.mean, s.log_std, s.log_std_active);
  s.noise = noise;
  s.pre_squash = s.mean.array() + s.log_std.array().exp() * noise.array();

  const Eigen::Index batch = states.cols();
  s.actions.resize(action_dim_, batch);
  s.log_prob.resize(batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    double lp = 0.0;
    for (int j = 0; j < action_dim_; ++j) {
      const double eps = noise(j, b);
      lp += -0.5 * eps * eps - s.log_std(j, b) - kHalfLog2Pi;
      const double u = s.pre_squash(j, b);
      if (squash_) {
        s.actions(j, b) = scale_ * std::tanh(u);
        lp -= std::log(scale_) + log_one_minus_tanh_sq(u);
      } else {
        s.actions(j, b) = u;
      }
    }
    s.log_prob[b] = lp;
  }
  return s;
}

Vec GaussianPolicy::backward(const PolicySample& s, const Mat& d_actions, const RowVec& d_log_prob) const {
  const Eigen::Index batch = s.actions.cols();
  require(d_actions.rows() == action_dim_ && d_actions.cols() == batch, "action adjoint has the wrong shape");
  require(d_log_prob.size() == batch, "log-prob adjoint has the wrong length");
  Mat d_out(2 * action_dim_, batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (int j = 0; j < action_dim_; ++j) {
      double d_u;
      if (squash_) {
        const double t = std::tanh(s.pre_squash(j, b));
        d_u = d_actions(j, b) * scale_ * (1.0 - t * t) + d_log_prob[b] * 2.0 * t;
      } else {
        d_u = d_actions(j, b);
      }
      const double sigma = std::exp(s.log_std(j, b));
      d_out(j, b) = d_u;
      const double d_log_std = d_u * sigma * s.noise(j, b) - d_log_prob[b];
      d_out(action_dim_ + j, b) = s.log_std_active(j, b) ? d_log_std : 0.0;
    }
  }
  Vec grad = Vec::Zero(net_.num_params());
  net_.backward(s.cache, d_out, &grad);
  return grad;
}

RowVec GaussianPolicy::log_prob(const Mat& states, const Mat& actions) const {
  PolicySample heads;
  const Mat out = net_.forward(states);
  split_heads(out, heads.mean, heads.log_std, heads.log_std_active);
  return log_prob(heads, actions);
}

RowVec GaussianPolicy::log_prob(const PolicySample& at, const Mat& actions) const {
  require(actions.rows() == action_dim_ && actions.cols() == at.mean.cols(), "actions have the wrong shape");
  RowVec out(actions.cols());
  for (Eigen::Index b = 0; b < actions.cols(); ++b) {
    double lp = 0.0;
    for (int j = 0; j < action_dim_; ++j) {
      double u = actions(j, b);
      double correction = 0.0;
      if (squash_) {
        const double y = std::clamp(actions(j, b) / scale_, -kAtanhLimit, kAtanhLimit);
        u = std::atanh(y);
        correction = std::log(scale_) + std::log1p(-y) + std::log1p(y);
      }
      const double z = (u - at.mean(j, b)) * std::exp(-at.log_std(j, b));
      lp += -0.5 * z * z - at.log_std(j, b) - kHalfLog2Pi - correction;
    }
    out[b] = lp;
  }
  return out;
}

Mat GaussianPolicy::deterministic_action(const Mat& states) const {
  const Mat mean = net_.forward(states).topRows(action_dim_);
  if (!squash_) return mean;
  return scale_ * mean.array().tanh();
}

Mat GaussianPolicy::standard_normal(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat m(rows, cols);
  for (Eigen::Index b = 0; b < cols; ++b) {
    for (Eigen::Index j = 0; j < rows; ++j) m(j, b) = normal(rng);
  }
  return m;
}

}  // namespace dac::nn
