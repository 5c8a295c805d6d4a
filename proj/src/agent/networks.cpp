#include "dac/agent/networks.hpp"

#include <cmath>

namespace dac::agent {

void DacHyper::validate() const {
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  require(beta > 0.0, "beta must be positive");
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(learning_rate > 0.0, "learning rate must be positive");
  require(batch_size > 0, "batch size must be positive");
  require(tau >= 0.0 && tau <= 1.0, "tau must lie in [0, 1]");
  require(horizon > 0, "horizon must be positive");
  require(ratio_clip > 0.0 && ratio_clip < 0.5, "ratio clip must lie in (0, 0.5)");
  require(alpha_min > 0.0 && alpha_min < alpha_max && alpha_max <= 1.0, "alpha range must satisfy 0 < lo < hi <= 1");
  require(alpha_reg >= 0.0, "alpha regularization must be nonnegative");
  require(!hidden.empty(), "networks need at least one hidden layer");
  for (int h : hidden) require(h > 0, "hidden layer sizes must be positive");
  require(buffer_capacity > 0, "buffer capacity must be positive");
  require(state_scale > 0.0, "state scale must be positive");
  require(!pin_ratio_to_one || alpha_mode == AlphaMode::fixed, "a pinned ratio requires fixed alpha");
}

std::string to_string(AlphaMode mode) { return mode == AlphaMode::fixed ? "fixed" : "adaptive"; }

AlphaMode parse_alpha_mode(const std::string& text) {
  if (text == "fixed") return AlphaMode::fixed;
  if (text == "adaptive") return AlphaMode::adaptive;
  throw ValidationError("alpha mode must be 'fixed' or 'adaptive', got '" + text + "'");
}

AlphaHead::AlphaHead(nn::Mlp net, double lo, double hi) : net_(std::move(net)), lo_(lo), hi_(hi) {
  require(net_.output_size() == 1 && net_.output_activation() == nn::OutputActivation::linear,
          "alpha network must have one linear output");
  require(lo < hi, "alpha range is empty");
}

RowVec AlphaHead::alpha(const Mat& states) const {
  const RowVec z = net_.forward(states).row(0);
  RowVec a(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) a[i] = lo_ + (hi_ - lo_) / (1.0 + std::exp(-z[i]));
  return a;
}

RowVec AlphaHead::alpha(const Mat& states, nn::ForwardCache& cache, RowVec& d_alpha_d_z) const {
  const RowVec z = net_.forward(states, cache).row(0);
  RowVec a(z.size());
  d_alpha_d_z.resize(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-z[i]));
    a[i] = lo_ + (hi_ - lo_) * s;
    d_alpha_d_z[i] = (hi_ - lo_) * s * (1.0 - s);
  }
  return a;
}

DacNetworks DacNetworks::create(int state_dim, int action_dim, double action_bound, const DacHyper& hyper,
                                nn::Rng& rng) {
  hyper.validate();
  require(state_dim > 0 && action_dim > 0, "network dimensions must be positive");
  auto sizes = [&](int in, int out) {
    std::vector<int> s{in};
    s.insert(s.end(), hyper.hidden.begin(), hyper.hidden.end());
    s.push_back(out);
    return s;
  };
  using nn::Mlp;
  using nn::OutputActivation;
  DacNetworks n;
  n.policy = nn::GaussianPolicy::initialized(state_dim, action_dim, hyper.hidden, rng, hyper.squash, action_bound);
  n.ratio = Mlp::initialized(sizes(state_dim + action_dim, 1), OutputActivation::sigmoid, rng);
  n.q1 = Mlp::initialized(sizes(state_dim + action_dim, 1), OutputActivation::linear, rng);
  n.q2 = Mlp::initialized(sizes(state_dim + action_dim, 1), OutputActivation::linear, rng);
  n.value = Mlp::initialized(sizes(state_dim, 1), OutputActivation::linear, rng);
  n.value_target = n.value;
  n.value_ema = nn::EmaTracker(n.value.params(), hyper.tau);
  n.has_alpha = hyper.alpha_mode == AlphaMode::adaptive;
  if (n.has_alpha) {
    n.alpha = AlphaHead(Mlp::initialized(sizes(state_dim, 1), OutputActivation::linear, rng, 1e-2),
                        hyper.alpha_min, hyper.alpha_max);
  }
  return n;
}

void DacNetworks::save(nn::Checkpoint& cp) const {
  cp.put("policy", policy.net().params());
  cp.put("ratio", ratio.params());
  cp.put("q1", q1.params());
  cp.put("q2", q2.params());
  cp.put("value", value.params());
  cp.put("value_target", value_ema.shadow());
  if (has_alpha) cp.put("alpha", alpha.net().params());
}

void DacNetworks::load(const nn::Checkpoint& cp) {
  auto assign = [&](const char* name, Vec& dst) {
    Vec v = cp.get_vec(name);
    require(v.size() == dst.size(), std::string("checkpoint entry ") + name + " has the wrong size");
    dst = std::move(v);
  };
  assign("policy", policy.net().params());
  assign("ratio", ratio.params());
  assign("q1", q1.params());
  assign("q2", q2.params());
  assign("value", value.params());
  assign("value_target", value_ema.shadow());
  sync_target();
  if (has_alpha) assign("alpha", alpha.net().params());
}

Mat state_action(const Mat& states, const Mat& actions) {
  require(states.cols() == actions.cols(), "state and action batches differ in size");
  Mat sa(states.rows() + actions.rows(), states.cols());
  sa.topRows(states.rows()) = states;
  sa.bottomRows(actions.rows()) = actions;
  return sa;
}

}  // namespace dac::agent
