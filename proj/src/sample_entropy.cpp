#include "dac/sample_entropy.hpp"

#include <algorithm>
#include <cmath>

namespace dac::entropy {

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// p log(p / m), zero when p = 0.
double kl_term(double p, double m) { return p > 0.0 ? p * std::log(p / m) : 0.0; }

}  // namespace

MixtureWeight::MixtureWeight(double alpha) : alpha_(alpha) {
  require(std::isfinite(alpha) && alpha >= 0.0 && alpha <= 1.0,
          "mixture weight must lie in [0, 1], got " + std::to_string(alpha));
}

void validate_probability_row(const Vec& p, const std::string& what) {
  require(p.size() > 0, what + ": empty probability row");
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    require(std::isfinite(p[i]) && p[i] >= 0.0, what + ": negative or non-finite entry");
  }
  require(std::abs(p.sum() - 1.0) <= kRowTolerance, what + ": row does not sum to 1");
}

DiscreteDistPair::DiscreteDistPair(Vec pi, Vec q) : pi_(std::move(pi)), q_(std::move(q)) {
  require(pi_.size() == q_.size(), "policy and buffer rows have different lengths");
  validate_probability_row(pi_, "policy row");
  validate_probability_row(q_, "buffer row");
}

double shannon_entropy(const Vec& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) h -= xlogx(p[i]);
  return h;
}

Vec mixture(const DiscreteDistPair& pair, MixtureWeight alpha) {
  const double a = alpha.value();
  return a * pair.pi() + (1.0 - a) * pair.q();
}

double mixture_entropy(const DiscreteDistPair& pair, MixtureWeight alpha) {
  return shannon_entropy(mixture(pair, alpha));
}

double js_skew_divergence(const DiscreteDistPair& pair, MixtureWeight alpha) {
  const double a = alpha.value();
  if (!alpha.interior()) return 0.0;
  const Vec mix = mixture(pair, alpha);
  double d = 0.0;
  for (Eigen::Index i = 0; i < mix.size(); ++i) {
    d += a * kl_term(pair.pi()[i], mix[i]) + (1.0 - a) * kl_term(pair.q()[i], mix[i]);
  }
  return std::max(d, 0.0);
}

double decomposition_constant(MixtureWeight) { return 0.0; }

double binary_entropy(MixtureWeight alpha) {
  const double a = alpha.value();
  return -xlogx(a) - xlogx(1.0 - a);
}

Vec ratio_closed_form(const DiscreteDistPair& pair, MixtureWeight alpha) {
  const double a = alpha.value();
  Vec r(pair.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    double q = pair.q()[i];
    if (alpha.interior() && q <= 0.0) q = kQFloor;
    const double num = a * pair.pi()[i];
    const double den = num + (1.0 - a) * q;
    r[i] = den > 0.0 ? num / den : 0.0;
  }
  return r;
}

double log_ratio_excess(double pi_a, double q_a, double ratio_a, double alpha) {
  const double scaled_pi = alpha * pi_a;
  if (scaled_pi > 0.0 && ratio_a > 0.0) return std::log(ratio_a) - std::log(scaled_pi);
  // Complement form; finite whenever (1 - alpha) q > 0.
  return std::log1p(-ratio_a) - std::log((1.0 - alpha) * q_a);
}

double entropy_via_ratio(const DiscreteDistPair& pair, MixtureWeight alpha, const Vec& ratio) {
  require(ratio.size() == pair.size(), "ratio length does not match the distribution pair");
  const double a = alpha.value();
  double policy_part = 0.0;
  double buffer_part = 0.0;
  for (Eigen::Index i = 0; i < ratio.size(); ++i) {
    const double pi = pair.pi()[i];
    const double q = pair.q()[i];
    if (a > 0.0 && pi > 0.0) policy_part += pi * log_ratio_excess(pi, q, ratio[i], a);
    if (a < 1.0 && q > 0.0) buffer_part += q * log_ratio_excess(pi, q, ratio[i], a);
  }
  return a * policy_part + (1.0 - a) * buffer_part;
}

double complement_identity_residual(const DiscreteDistPair& pair, MixtureWeight alpha) {
  require(alpha.interior(), "identity check needs alpha strictly inside (0, 1)");
  require((pair.pi().array() > 0.0).all() && (pair.q().array() > 0.0).all(),
          "identity check needs strictly positive rows");
  const double a = alpha.value();
  const Vec r = ratio_closed_form(pair, alpha);
  // 1 - R is formed as (1 - a) q / q_mix; subtracting from one would lose
  // most significant digits when R is close to one.
  const Vec r_complement = ratio_closed_form(DiscreteDistPair(pair.q(), pair.pi()), MixtureWeight(1.0 - a));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double lhs = std::log(r[i]) - std::log(a * pair.pi()[i]);
    const double rhs = std::log(r_complement[i]) - std::log((1.0 - a) * pair.q()[i]);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace dac::entropy
