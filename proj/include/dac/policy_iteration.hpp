#pragma once

#include "dac/finite_mdp.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace dac::dpi {

enum class ImprovementMode { closed_form, exact_simplex };

struct DpiConfig {
  double alpha = 0.5;
  double beta = 1.0;
  ImprovementMode improvement_mode = ImprovementMode::exact_simplex;
  double tol = 1e-10;       // stop when the sup-norm policy change falls below this
  int max_iters = 500;
  double monotone_tol = 1e-8;

  void validate() const;
};

struct DpiIterate {
  TabularPolicy policy;
  QTable q;
  Vec j;                    // beta * V(s), the per-state objective
  double max_policy_delta;  // sup-norm change produced by the following improvement
};

struct DpiTrace {
  std::vector<DpiIterate> iterations;
  TabularPolicy final_policy;
  bool converged = false;
};

/// Raised when Q or J decreases between consecutive iterations beyond tolerance.
class MonotonicityViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Closed-form ratio table R(s,a) = alpha pi / (alpha pi + (1 - alpha) q).
Mat ratio_table(const TabularPolicy& pi, const TabularActionDistribution& q, double alpha);

/// pi_new(.|s) proportional to R_old(s,.) exp(Q(s,.) / alpha), the maximizer of
/// E_pi[Q + alpha log R_old - alpha log pi].
Vec improve_closed_form_row(const Vec& q_row, const Vec& ratio_row, double alpha);
TabularPolicy improve_closed_form(const QTable& q, const Mat& ratio_old, double alpha);

/// Exact maximizer of E_pi[Q] + H(alpha pi + (1 - alpha) q) over the simplex.
/// The optimality conditions give q_mix(a) = max(exp((Q_a - lambda)/alpha - 1), (1 - alpha) q_a)
/// for a scalar multiplier lambda, which is found by bisection.
Vec maximize_mixture_objective_row(const Vec& q_row, const Vec& buffer_row, double alpha);
TabularPolicy exact_simplex_improve(const QTable& q, const TabularActionDistribution& buffer,
                                    double alpha, double beta);

/// Gradient of E_pi[Q] + H(alpha pi + (1 - alpha) q) with respect to pi.
Vec mixture_objective_gradient(const Vec& pi, const Vec& q_row, const Vec& buffer_row, double alpha);

/// max_a g_a - <pi, g>; bounds the suboptimality of a concave objective on the simplex.
double frank_wolfe_gap(const Vec& pi, const Vec& gradient);

struct MirrorAscentResult {
  Vec pi;
  int iterations = 0;
  double gap = 0.0;
  bool converged = false;
};

/// Entropic mirror ascent pi <- pi * exp(step * g(pi)) / Z from `start`.
MirrorAscentResult mirror_ascent(const std::function<Vec(const Vec&)>& gradient, Vec start,
                                 double step, double gap_tol, int max_iters);

/// Alternates exact diverse evaluation and the configured improvement with q
/// held fixed. Throws MonotonicityViolation if Q or J decreases.
DpiTrace run_dpi(const FiniteMdp& mdp, const TabularActionDistribution& q, const DpiConfig& cfg,
                 const TabularPolicy& pi0);

/// Schema-tagged CSV with rows iter,state,J,max_policy_delta.
void write_trace_csv(std::ostream& out, const DpiTrace& trace);

struct ToyResult {
  double alpha = 0.0;
  Vec buffer_row;
  Vec dac_policy;
  Vec dac_mixture;
  Vec uniform_policy;
  double dac_expected_steps = 0.0;
  double uniform_expected_steps = 0.0;
};

/// One-step problem with n actions where the buffer holds the first n - 1
/// actions once each and alpha = 1/n. Compares the sample-aware maximizer with
/// the plain entropy maximizer by the expected number of draws needed to try
/// the missing action.
ToyResult toy_example(int n_actions);

// Softmax-parameterized single-state objectives, used to check that the
// surrogate with a frozen ratio has the same gradient as the full objective.

Vec softmax(const Vec& logits);

/// beta (E_pi[Q] + H(alpha pi + (1 - alpha) q)) with pi = softmax(theta).
double full_objective(const Vec& theta, const Vec& q_row, const Vec& buffer_row, double alpha, double beta);
Vec full_objective_gradient(const Vec& theta, const Vec& q_row, const Vec& buffer_row, double alpha,
                            double beta);

/// beta E_pi[Q + alpha log R_old - alpha log pi] with pi = softmax(theta).
double surrogate_objective(const Vec& theta, const Vec& q_row, const Vec& ratio_old, double alpha,
                           double beta);
Vec surrogate_objective_gradient(const Vec& theta, const Vec& q_row, const Vec& ratio_old, double alpha,
                                 double beta);

}  // namespace dac::dpi
