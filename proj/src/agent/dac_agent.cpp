#include "dac/agent/dac_agent.hpp"

namespace dac::agent {

namespace {

nn::Adam make_opt(Eigen::Index n, double lr) { return nn::Adam(n, nn::AdamConfig{lr}); }

void save_opt(nn::Checkpoint& cp, const std::string& name, const nn::Adam& opt) {
  cp.put_scalar("opt." + name + ".t", static_cast<double>(opt.steps()));
  cp.put("opt." + name + ".m", opt.first_moment());
  cp.put("opt." + name + ".v", opt.second_moment());
}

void load_opt(const nn::Checkpoint& cp, const std::string& name, nn::Adam& opt) {
  opt.restore(static_cast<long long>(cp.get_scalar("opt." + name + ".t")), cp.get_vec("opt." + name + ".m"),
              cp.get_vec("opt." + name + ".v"));
}

}  // namespace

DacAgent::DacAgent(int state_dim, int action_dim, double action_bound, DacHyper hyper, nn::Rng& rng)
    : hyper_(std::move(hyper)), nets_(DacNetworks::create(state_dim, action_dim, action_bound, hyper_, rng)) {
  const double lr = hyper_.learning_rate;
  opt_policy_ = make_opt(nets_.policy.net().num_params(), lr);
  opt_ratio_ = make_opt(nets_.ratio.num_params(), lr);
  opt_q1_ = make_opt(nets_.q1.num_params(), lr);
  opt_q2_ = make_opt(nets_.q2.num_params(), lr);
  opt_value_ = make_opt(nets_.value.num_params(), lr);
  if (nets_.has_alpha) opt_alpha_ = make_opt(nets_.alpha.net().num_params(), lr);
}

Vec DacAgent::act(const Vec& state, nn::Rng& rng) const {
  const Mat s = normalize_states(state, hyper_);
  const Mat noise = nn::GaussianPolicy::standard_normal(nets_.action_dim(), 1, rng);
  return nets_.policy.sample(s, noise).actions.col(0);
}

Vec DacAgent::act_deterministic(const Vec& state) const {
  return nets_.policy.deterministic_action(normalize_states(state, hyper_)).col(0);
}

StepMetrics DacAgent::train_step(const ReplayBuffer& buffer, nn::Rng& rng) {
  require(!buffer.empty(), "cannot train on an empty replay buffer");
  const auto m = static_cast<std::size_t>(hyper_.batch_size);
  const std::size_t window = hyper_.window > 0 ? hyper_.window : buffer.size();
  const Batch batch = buffer.gather(buffer.sample_recent_indices(m, window, rng));
  const Mat noise = nn::GaussianPolicy::standard_normal(nets_.action_dim(), hyper_.batch_size, rng);
  return train_on_batch(batch, noise);
}

StepMetrics DacAgent::train_on_batch(const Batch& batch, const Mat& noise) {
  const StepTerms terms = compute_terms(nets_, hyper_, batch, noise, faults_);
  StepMetrics out;
  out.losses = loss_values(nets_, hyper_, terms);
  const StepGradients g = loss_gradients(nets_, hyper_, terms, faults_);

  opt_policy_.ascend(nets_.policy.net().params(), g.policy);
  opt_ratio_.ascend(nets_.ratio.params(), g.ratio);
  opt_q1_.descend(nets_.q1.params(), g.q1);
  opt_q2_.descend(nets_.q2.params(), g.q2);
  opt_value_.descend(nets_.value.params(), g.value);
  nets_.value_ema.update(nets_.value.params());
  nets_.sync_target();
  if (nets_.has_alpha) opt_alpha_.descend(nets_.alpha.net().params(), g.alpha);
  out.trained = true;
  return out;
}

void DacAgent::save(nn::Checkpoint& cp) const {
  nets_.save(cp);
  save_opt(cp, "policy", opt_policy_);
  save_opt(cp, "ratio", opt_ratio_);
  save_opt(cp, "q1", opt_q1_);
  save_opt(cp, "q2", opt_q2_);
  save_opt(cp, "value", opt_value_);
  if (nets_.has_alpha) save_opt(cp, "alpha", opt_alpha_);
}

void DacAgent::load(const nn::Checkpoint& cp) {
  nets_.load(cp);
  load_opt(cp, "policy", opt_policy_);
  load_opt(cp, "ratio", opt_ratio_);
  load_opt(cp, "q1", opt_q1_);
  load_opt(cp, "q2", opt_q2_);
  load_opt(cp, "value", opt_value_);
  if (nets_.has_alpha) load_opt(cp, "alpha", opt_alpha_);
}

}  // namespace dac::agent
