#pragma once

// Closed-form mathematics of the sample-aware entropy on discrete action sets.
// All entropies are in nats and use the 0 log 0 = 0 convention.

#include "dac/common.hpp"

namespace dac::entropy {

/// Floor substituted for q(a|s) = 0 before ratios or logs when alpha is in (0,1).
inline constexpr double kQFloor = 1e-12;

/// Tolerance used when validating that a row is a probability vector.
inline constexpr double kRowTolerance = 1e-12;

class MixtureWeight {
 public:
  explicit MixtureWeight(double alpha);
  double value() const { return alpha_; }
  bool interior() const { return alpha_ > 0.0 && alpha_ < 1.0; }

 private:
  double alpha_;
};

/// A pair of action distributions (policy row and buffer row) over the same
/// action set.
class DiscreteDistPair {
 public:
  DiscreteDistPair(Vec pi, Vec q);

  const Vec& pi() const { return pi_; }
  const Vec& q() const { return q_; }
  Eigen::Index size() const { return pi_.size(); }

 private:
  Vec pi_;
  Vec q_;
};

/// Throws ValidationError unless `p` is nonnegative and sums to one.
void validate_probability_row(const Vec& p, const std::string& what);

double shannon_entropy(const Vec& p);

/// alpha * pi + (1 - alpha) * q
Vec mixture(const DiscreteDistPair& pair, MixtureWeight alpha);

/// Entropy of the mixture distribution.
double mixture_entropy(const DiscreteDistPair& pair, MixtureWeight alpha);

/// alpha-skew Jensen-Shannon symmetrization of KL:
///   alpha KL(pi || mix) + (1 - alpha) KL(q || mix).
double js_skew_divergence(const DiscreteDistPair& pair, MixtureWeight alpha);

/// Additive constant in H(mix) = D_JS + alpha H(pi) + (1 - alpha) H(q) + c.
/// With D_JS defined as above the constant is identically zero; the value is
/// returned explicitly so callers can test the decomposition exactly.
double decomposition_constant(MixtureWeight alpha);

/// The candidate constant -alpha ln alpha - (1 - alpha) ln(1 - alpha), i.e. the
/// binary entropy of alpha. It is the offset between H(mix) and the
/// decomposition when D_JS is written without factoring alpha out of the logs.
double binary_entropy(MixtureWeight alpha);

/// R = alpha pi / (alpha pi + (1 - alpha) q), elementwise. For alpha in (0,1)
/// zero entries of q are floored at kQFloor.
Vec ratio_closed_form(const DiscreteDistPair& pair, MixtureWeight alpha);

/// log R - log(alpha pi) for one action, which equals -log q_mix(a).
/// Where alpha pi(a) = 0 the equivalent form log(1 - R) - log((1 - alpha) q)
/// is used so the result stays finite.
double log_ratio_excess(double pi_a, double q_a, double ratio_a, double alpha);

/// Mixture entropy written through the ratio function:
///   alpha E_pi[log R - log alpha pi] + (1 - alpha) E_q[log R - log alpha pi].
double entropy_via_ratio(const DiscreteDistPair& pair, MixtureWeight alpha, const Vec& ratio);

/// max_a |(log R - log alpha pi) - (log(1 - R) - log((1 - alpha) q))| with the
/// exact ratio. Requires alpha in (0,1) and strictly positive rows.
double complement_identity_residual(const DiscreteDistPair& pair, MixtureWeight alpha);

}  // namespace dac::entropy
