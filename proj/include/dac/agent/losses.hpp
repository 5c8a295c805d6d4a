#pragma once

#include "dac/agent/networks.hpp"
#include "dac/replay.hpp"

namespace dac::agent {

// Per-sample building blocks shared by the learner and the verification
// suites. "pi-samples" are reparameterized policy actions at the batch states;
// "buffer samples" are the actions stored with those transitions.

/// Clamp a ratio output into [eps, 1 - eps] before it enters a logarithm.
double clip_ratio(double r, double eps);

/// Clamp the buffer-action term of the value target into [-bound, bound].
double clip_buffer_term(double inner, double bound, const FaultInjection& faults);

/// Adjoints of  sum_i w_i alpha_i log R_i  (pi-samples) and
/// sum_j w_j (1 - alpha_j) log(1 - R_j)  (buffer samples) with respect to the
/// raw ratio outputs. Outputs outside the clip window get a zero adjoint.
struct RatioAdjoint {
  RowVec at_policy;
  RowVec at_buffer;
};
RatioAdjoint ratio_objective_adjoint(const RowVec& r_policy, const RowVec& w_policy, const RowVec& alpha_policy,
                                     const RowVec& r_buffer, const RowVec& w_buffer, const RowVec& alpha_buffer,
                                     double eps, const FaultInjection& faults);

/// Value target for one state:
///   min Q(a_pi) + alpha (log R(a_pi) - log alpha - log pi(a_pi))
///   + (1 - alpha) clip(log R(a_D) - log alpha - log pi(a_D); -bound, bound).
/// At alpha = 0 the entropy terms are dropped; at alpha = 1 the buffer term has
/// coefficient zero. `buffer_term` receives the clipped inner value.
double value_target(double min_q, double log_r_pi, double log_pi_pi, double log_r_d, double log_pi_d, double alpha,
                    double bound, const FaultInjection& faults, double* buffer_term = nullptr);

/// d L_alpha / d alpha for one state: the policy expectation of
/// (log R - log alpha pi) minus c, minus the clipped buffer expectation.
double alpha_loss_signal(double policy_term, double buffer_term, double control);

/// Mean over states of  alpha(s) P + (1 - alpha(s)) B - alpha(s) c  plus
/// reg/2 |xi|^2, with the per-state terms P and B held fixed. Its derivative
/// with respect to alpha is alpha_loss_signal, so the gradient below is the
/// alpha update direction.
double alpha_surrogate_loss(const AlphaHead& head, const Mat& states, const RowVec& policy_term,
                            const RowVec& buffer_term, double control, double reg);
Vec alpha_surrogate_gradient(const AlphaHead& head, const Mat& states, const RowVec& policy_term,
                             const RowVec& buffer_term, double control, double reg);

/// Estimate of the skew divergence alpha KL(pi || mix) + (1 - alpha) KL(q || mix)
/// from one pi-sample and one buffer sample.
double js_divergence_sample(double log_r_pi, double r_d, double alpha, double eps);

/// Everything one gradient step needs, evaluated at fixed parameters, batch and noise.
struct StepTerms {
  Batch batch;
  Mat states;       // normalized
  Mat next_states;  // normalized
  nn::PolicySample pi;
  RowVec alpha;

  nn::ForwardCache q1_pi_cache, q2_pi_cache, ratio_pi_cache;
  nn::ForwardCache q1_d_cache, q2_d_cache, ratio_d_cache, value_cache;
  RowVec q1_pi, q2_pi, min_q_pi;
  RowVec r_pi, r_d;            // raw ratio outputs
  RowVec log_r_pi, log_r_d;    // after clipping (zero when pinned)
  RowVec log_pi_d;
  RowVec q1_d, q2_d, v_s, v_next;
  RowVec q_hat, v_hat;
  RowVec policy_term, buffer_term;  // alpha-loss ingredients
};

struct LossValues {
  double obj_pi = 0.0;
  double obj_ratio = 0.0;
  double loss_q1 = 0.0;
  double loss_q2 = 0.0;
  double loss_v = 0.0;
  double loss_alpha = 0.0;  // zero in fixed mode
  double mean_alpha = 0.0;
  double mean_entropy = 0.0;  // policy entropy estimate, -E[log pi]
  double mean_js_div = 0.0;
  double mean_ratio = 0.0;
  double buffer_term_min = 0.0;
  double buffer_term_max = 0.0;
};

struct StepGradients {
  Vec policy;  // ascent direction of the policy objective
  Vec ratio;   // ascent direction of the ratio objective
  Vec q1;      // descent directions below
  Vec q2;
  Vec value;
  Vec alpha;   // empty in fixed mode
};

StepTerms compute_terms(const DacNetworks& nets, const DacHyper& hyper, const Batch& batch, const Mat& noise,
                        const FaultInjection& faults = {});
LossValues loss_values(const DacNetworks& nets, const DacHyper& hyper, const StepTerms& terms);
StepGradients loss_gradients(const DacNetworks& nets, const DacHyper& hyper, const StepTerms& terms,
                             const FaultInjection& faults = {});

/// Apply the affine state normalization of `hyper` column-wise.
Mat normalize_states(const Mat& states, const DacHyper& hyper);

}  // namespace dac::agent
