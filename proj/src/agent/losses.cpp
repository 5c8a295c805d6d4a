#include "dac/agent/losses.hpp"

#include <algorithm>
#include <cmath>

namespace dac::agent {

double clip_ratio(double r, double eps) { return std::clamp(r, eps, 1.0 - eps); }

double clip_buffer_term(double inner, double bound, const FaultInjection& faults) {
  if (faults.drop_value_clip) return inner;
  return std::clamp(inner, -bound, bound);
}

RatioAdjoint ratio_objective_adjoint(const RowVec& r_policy, const RowVec& w_policy, const RowVec& alpha_policy,
                                     const RowVec& r_buffer, const RowVec& w_buffer, const RowVec& alpha_buffer,
                                     double eps, const FaultInjection& faults) {
  require(r_policy.size() == w_policy.size() && r_policy.size() == alpha_policy.size(),
          "policy-sample ratio inputs differ in length");
  require(r_buffer.size() == w_buffer.size() && r_buffer.size() == alpha_buffer.size(),
          "buffer-sample ratio inputs differ in length");
  const double sign = faults.flip_ratio_grad_sign ? -1.0 : 1.0;
  RatioAdjoint adj{RowVec::Zero(r_policy.size()), RowVec::Zero(r_buffer.size())};
  for (Eigen::Index i = 0; i < r_policy.size(); ++i) {
    const double r = r_policy[i];
    if (r > eps && r < 1.0 - eps) adj.at_policy[i] = sign * w_policy[i] * alpha_policy[i] / r;
  }
  for (Eigen::Index j = 0; j < r_buffer.size(); ++j) {
    const double r = r_buffer[j];
    if (r > eps && r < 1.0 - eps) adj.at_buffer[j] = -sign * w_buffer[j] * (1.0 - alpha_buffer[j]) / (1.0 - r);
  }
  return adj;
}

double value_target(double min_q, double log_r_pi, double log_pi_pi, double log_r_d, double log_pi_d, double alpha,
                    double bound, const FaultInjection& faults, double* buffer_term) {
  if (alpha <= 0.0) {
    if (buffer_term != nullptr) *buffer_term = 0.0;
    return min_q;
  }
  const double log_alpha = std::log(alpha);
  const double term = clip_buffer_term(log_r_d - log_alpha - log_pi_d, bound, faults);
  if (buffer_term != nullptr) *buffer_term = term;
  double v = min_q + alpha * (log_r_pi - log_alpha - log_pi_pi);
  if (alpha < 1.0) v += (1.0 - alpha) * term;
  return v;
}

double alpha_loss_signal(double policy_term, double buffer_term, double control) {
  return policy_term - control - buffer_term;
}

double alpha_surrogate_loss(const AlphaHead& head, const Mat& states, const RowVec& policy_term,
                            const RowVec& buffer_term, double control, double reg) {
  const RowVec a = head.alpha(states);
  require(a.size() == policy_term.size() && a.size() == buffer_term.size(), "alpha loss inputs differ in length");
  double total = 0.0;
  for (Eigen::Index b = 0; b < a.size(); ++b) {
    total += a[b] * policy_term[b] + (1.0 - a[b]) * buffer_term[b] - a[b] * control;
  }
  return total / static_cast<double>(a.size()) + 0.5 * reg * head.net().params().squaredNorm();
}

Vec alpha_surrogate_gradient(const AlphaHead& head, const Mat& states, const RowVec& policy_term,
                             const RowVec& buffer_term, double control, double reg) {
  nn::ForwardCache cache;
  RowVec d_alpha_d_z;
  const RowVec a = head.alpha(states, cache, d_alpha_d_z);
  require(a.size() == policy_term.size() && a.size() == buffer_term.size(), "alpha loss inputs differ in length");
  const double w = 1.0 / static_cast<double>(a.size());
  RowVec d_z(a.size());
  for (Eigen::Index b = 0; b < a.size(); ++b) {
    d_z[b] = w * alpha_loss_signal(policy_term[b], buffer_term[b], control) * d_alpha_d_z[b];
  }
  Vec g = reg * head.net().params();
  head.net().backward(cache, d_z, &g);
  return g;
}

double js_divergence_sample(double log_r_pi, double r_d, double alpha, double eps) {
  if (alpha <= 0.0 || alpha >= 1.0) return 0.0;
  return alpha * (log_r_pi - std::log(alpha)) +
         (1.0 - alpha) * (std::log1p(-clip_ratio(r_d, eps)) - std::log1p(-alpha));
}

Mat normalize_states(const Mat& states, const DacHyper& hyper) {
  if (hyper.state_shift == 0.0 && hyper.state_scale == 1.0) return states;
  return (states.array() - hyper.state_shift) * hyper.state_scale;
}

StepTerms compute_terms(const DacNetworks& nets, const DacHyper& hyper, const Batch& batch, const Mat& noise,
                        const FaultInjection& faults) {
  const Eigen::Index m = batch.size();
  require(m > 0, "empty training batch");
  StepTerms t;
  t.batch = batch;
  t.states = normalize_states(batch.states, hyper);
  t.next_states = normalize_states(batch.next_states, hyper);
  t.pi = nets.policy.sample(t.states, noise);

  if (nets.has_alpha) {
    t.alpha = nets.alpha.alpha(t.states);
  } else {
    t.alpha = RowVec::Constant(m, hyper.alpha);
  }

  const Mat sa_pi = state_action(t.states, t.pi.actions);
  const Mat sa_d = state_action(t.states, batch.actions);
  t.q1_pi = nets.q1.forward(sa_pi, t.q1_pi_cache).row(0);
  t.q2_pi = nets.q2.forward(sa_pi, t.q2_pi_cache).row(0);
  t.min_q_pi = t.q1_pi.cwiseMin(t.q2_pi);
  t.r_pi = nets.ratio.forward(sa_pi, t.ratio_pi_cache).row(0);
  t.r_d = nets.ratio.forward(sa_d, t.ratio_d_cache).row(0);
  t.log_r_pi.resize(m);
  t.log_r_d.resize(m);
  for (Eigen::Index b = 0; b < m; ++b) {
    t.log_r_pi[b] = hyper.pin_ratio_to_one ? 0.0 : std::log(clip_ratio(t.r_pi[b], hyper.ratio_clip));
    t.log_r_d[b] = hyper.pin_ratio_to_one ? 0.0 : std::log(clip_ratio(t.r_d[b], hyper.ratio_clip));
  }
  t.log_pi_d = nets.policy.log_prob(t.pi, batch.actions);
  t.q1_d = nets.q1.forward(sa_d, t.q1_d_cache).row(0);
  t.q2_d = nets.q2.forward(sa_d, t.q2_d_cache).row(0);
  t.v_s = nets.value.forward(t.states, t.value_cache).row(0);
  t.v_next = nets.value_target.forward(t.next_states).row(0);

  t.q_hat = batch.rewards / hyper.beta +
            hyper.gamma * (RowVec::Ones(m) - batch.done).cwiseProduct(t.v_next);

  const double bound = hyper.effective_clip_bound(nets.action_dim());
  t.v_hat.resize(m);
  t.policy_term.resize(m);
  t.buffer_term.resize(m);
  for (Eigen::Index b = 0; b < m; ++b) {
    double bt = 0.0;
    t.v_hat[b] = value_target(t.min_q_pi[b], t.log_r_pi[b], t.pi.log_prob[b], t.log_r_d[b], t.log_pi_d[b], t.alpha[b],
                              bound, faults, &bt);
    t.buffer_term[b] = bt;
    t.policy_term[b] = t.alpha[b] > 0.0 ? t.log_r_pi[b] - std::log(t.alpha[b]) - t.pi.log_prob[b] : 0.0;
  }
  const bool finite = t.v_hat.allFinite() && t.q_hat.allFinite() && t.pi.log_prob.allFinite() &&
                      t.log_pi_d.allFinite() && t.min_q_pi.allFinite();
  if (!finite) throw NumericalError("non-finite value in the training targets");
  return t;
}

LossValues loss_values(const DacNetworks& nets, const DacHyper& hyper, const StepTerms& t) {
  const Eigen::Index m = t.batch.size();
  const double inv_m = 1.0 / static_cast<double>(m);
  LossValues v;
  double js = 0.0;
  double ratio_obj = 0.0;
  for (Eigen::Index b = 0; b < m; ++b) {
    const double a = t.alpha[b];
    v.obj_pi += t.min_q_pi[b] + a * (t.log_r_pi[b] - t.pi.log_prob[b]);
    ratio_obj += a * std::log(clip_ratio(t.r_pi[b], hyper.ratio_clip)) +
                 (1.0 - a) * std::log1p(-clip_ratio(t.r_d[b], hyper.ratio_clip));
    const double dq1 = t.q1_d[b] - t.q_hat[b];
    const double dq2 = t.q2_d[b] - t.q_hat[b];
    const double dv = t.v_s[b] - t.v_hat[b];
    v.loss_q1 += 0.5 * dq1 * dq1;
    v.loss_q2 += 0.5 * dq2 * dq2;
    v.loss_v += 0.5 * dv * dv;
    js += hyper.pin_ratio_to_one ? 0.0 : js_divergence_sample(t.log_r_pi[b], t.r_d[b], a, hyper.ratio_clip);
  }
  v.obj_pi *= inv_m;
  v.obj_ratio = ratio_obj * inv_m;
  v.loss_q1 *= inv_m;
  v.loss_q2 *= inv_m;
  v.loss_v *= inv_m;
  if (nets.has_alpha) {
    v.loss_alpha = alpha_surrogate_loss(nets.alpha, t.states, t.policy_term, t.buffer_term,
                                        hyper.effective_control(nets.action_dim()), hyper.alpha_reg);
  }
  v.mean_alpha = t.alpha.mean();
  v.mean_entropy = -t.pi.log_prob.mean();
  v.mean_js_div = std::max(0.0, js * inv_m);
  v.mean_ratio = t.r_pi.mean();
  v.buffer_term_min = t.buffer_term.minCoeff();
  v.buffer_term_max = t.buffer_term.maxCoeff();
  return v;
}

StepGradients loss_gradients(const DacNetworks& nets, const DacHyper& hyper, const StepTerms& t,
                             const FaultInjection& faults) {
  const Eigen::Index m = t.batch.size();
  const int ad = nets.action_dim();
  const double w = 1.0 / static_cast<double>(m);
  const RowVec weights = RowVec::Constant(m, w);
  StepGradients g;

  // Policy: the reparameterized action feeds the smaller critic and the ratio.
  {
    RowVec d_q1 = RowVec::Zero(m);
    RowVec d_q2 = RowVec::Zero(m);
    RowVec d_r = RowVec::Zero(m);
    for (Eigen::Index b = 0; b < m; ++b) {
      (t.q1_pi[b] <= t.q2_pi[b] ? d_q1 : d_q2)[b] = w;
      const double r = t.r_pi[b];
      if (!hyper.pin_ratio_to_one && r > hyper.ratio_clip && r < 1.0 - hyper.ratio_clip) {
        d_r[b] = w * t.alpha[b] / r;
      }
    }
    Mat d_action = nets.q1.backward(t.q1_pi_cache, d_q1, nullptr).bottomRows(ad);
    d_action += nets.q2.backward(t.q2_pi_cache, d_q2, nullptr).bottomRows(ad);
    if (!hyper.pin_ratio_to_one) d_action += nets.ratio.backward(t.ratio_pi_cache, d_r, nullptr).bottomRows(ad);
    const RowVec d_log_prob = -w * t.alpha;
    g.policy = nets.policy.backward(t.pi, d_action, d_log_prob);
  }

  {
    const RatioAdjoint adj =
        ratio_objective_adjoint(t.r_pi, weights, t.alpha, t.r_d, weights, t.alpha, hyper.ratio_clip, faults);
    g.ratio = Vec::Zero(nets.ratio.num_params());
    nets.ratio.backward(t.ratio_pi_cache, adj.at_policy, &g.ratio);
    nets.ratio.backward(t.ratio_d_cache, adj.at_buffer, &g.ratio);
  }

  g.q1 = Vec::Zero(nets.q1.num_params());
  nets.q1.backward(t.q1_d_cache, w * (t.q1_d - t.q_hat), &g.q1);
  g.q2 = Vec::Zero(nets.q2.num_params());
  nets.q2.backward(t.q2_d_cache, w * (t.q2_d - t.q_hat), &g.q2);
  g.value = Vec::Zero(nets.value.num_params());
  nets.value.backward(t.value_cache, w * (t.v_s - t.v_hat), &g.value);

  if (nets.has_alpha) {
    g.alpha = alpha_surrogate_gradient(nets.alpha, t.states, t.policy_term, t.buffer_term,
                                       hyper.effective_control(ad), hyper.alpha_reg);
  }

  auto check = [](const Vec& v, const char* what) {
    if (!v.allFinite()) throw NumericalError(std::string("non-finite gradient for the ") + what);
  };
  check(g.policy, "policy");
  check(g.ratio, "ratio network");
  check(g.q1, "first critic");
  check(g.q2, "second critic");
  check(g.value, "value network");
  if (nets.has_alpha) check(g.alpha, "alpha network");
  return g;
}

}  // namespace dac::agent
