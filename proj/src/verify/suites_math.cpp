#include "dac/env/simple.hpp"
#include "dac/finite_mdp.hpp"
#include "dac/harness/csv.hpp"
#include "dac/policy_iteration.hpp"
#include "dac/sample_entropy.hpp"
#include "dac/agent/losses.hpp"
#include "dac/verify/oracles.hpp"
#include "dac/verify/suites.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dac::verify {

namespace {

using harness::format_double;

struct RandomTriple {
  entropy::DiscreteDistPair pair;
  double alpha;
};

Vec dirichlet(int n, nn::Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = e(rng) + 1e-9;
  return v / v.sum();
}

double open_unit(nn::Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = 0.0;
  while (x <= 0.0 || x >= 1.0) x = u(rng);
  return x;
}

std::vector<RandomTriple> random_triples(int count, nn::Rng& rng) {
  std::uniform_int_distribution<int> size(2, 16);
  std::vector<RandomTriple> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int n = size(rng);
    Vec pi = dirichlet(n, rng);
    Vec q = dirichlet(n, rng);
    out.push_back({entropy::DiscreteDistPair(std::move(pi), std::move(q)), open_unit(rng)});
  }
  return out;
}

SuiteResult make(bool passed, double measured, double tol, std::string detail = {}) {
  SuiteResult r;
  r.passed = passed;
  r.measured = format_double(measured);
  r.tolerance = format_double(tol);
  r.detail = std::move(detail);
  return r;
}

}  // namespace

SuiteResult entropy_decomposition(const SuiteOptions& opt) {
  nn::Rng rng(opt.seed);
  const auto triples = random_triples(1000, rng);
  double worst_stated = 0.0;
  double worst_zero = 0.0;
  for (const auto& [pair, a] : triples) {
    const entropy::MixtureWeight alpha(a);
    const double h_mix = entropy::mixture_entropy(pair, alpha);
    const double parts = entropy::js_skew_divergence(pair, alpha) + a * entropy::shannon_entropy(pair.pi()) +
                         (1.0 - a) * entropy::shannon_entropy(pair.q());
    // The stated constant is -a ln a - (1 - a) ln(1 - a).
    const double stated = parts - a * std::log(a) - (1.0 - a) * std::log(1.0 - a);
    worst_stated = std::max(worst_stated, std::abs(h_mix - stated));
    worst_zero = std::max(worst_zero, std::abs(h_mix - (parts + entropy::decomposition_constant(alpha))));
  }
  constexpr double kTol = 1e-12;
  return make(worst_stated <= kTol, worst_stated, kTol,
              "stated constant -a ln a - (1-a) ln(1-a); residual with a zero constant: " + format_double(worst_zero));
}

SuiteResult ratio_identities(const SuiteOptions& opt) {
  nn::Rng rng(opt.seed);
  const auto triples = random_triples(1000, rng);
  double worst_ratio_form = 0.0;
  double worst_complement = 0.0;
  for (const auto& [pair, a] : triples) {
    const entropy::MixtureWeight alpha(a);
    const Vec ratio = entropy::ratio_closed_form(pair, alpha);
    worst_ratio_form = std::max(worst_ratio_form, std::abs(entropy::entropy_via_ratio(pair, alpha, ratio) -
                                                           entropy::mixture_entropy(pair, alpha)));
    worst_complement = std::max(worst_complement, entropy::complement_identity_residual(pair, alpha));
  }
  constexpr double kTol = 1e-12;
  const double worst = std::max(worst_ratio_form, worst_complement);
  return make(worst <= kTol, worst, kTol,
              "ratio-form entropy " + format_double(worst_ratio_form) + ", complement identity " +
                  format_double(worst_complement));
}

SuiteResult ratio_optimum(const SuiteOptions& opt) {
  struct Problem {
    Vec pi, q;
    double alpha;
  };
  auto row = [](std::initializer_list<double> v) {
    Vec r(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) r[i++] = x;
    return r;
  };
  const std::vector<Problem> problems = {
      {row({0.1, 0.2, 0.3, 0.4}), row({0.4, 0.3, 0.2, 0.1}), 0.5},
      {row({0.6, 0.4}), row({0.2, 0.8}), 0.3},
      {row({0.05, 0.15, 0.5, 0.3}), row({0.25, 0.25, 0.25, 0.25}), 0.8},
  };
  constexpr int kMaxSteps = 10000;
  constexpr double kTol = 1e-3;
  constexpr double kStep = 2.0;
  constexpr double kEps = 1e-4;
  double worst = 0.0;
  int worst_steps = 0;
  for (const auto& p : problems) {
    const Vec target = entropy::ratio_closed_form(entropy::DiscreteDistPair(p.pi, p.q), entropy::MixtureWeight(p.alpha));
    const Eigen::Index n = p.pi.size();
    const RowVec alpha_row = RowVec::Constant(n, p.alpha);
    RowVec logits = RowVec::Zero(n);
    double err = 1.0;
    int steps = 0;
    for (; steps < kMaxSteps; ++steps) {
      const RowVec r = (1.0 + (-logits.array()).exp()).inverse().matrix();
      err = (r.transpose() - target).cwiseAbs().maxCoeff();
      if (err <= kTol) break;
      const agent::RatioAdjoint adj = agent::ratio_objective_adjoint(r, p.pi.transpose(), alpha_row, r,
                                                                     p.q.transpose(), alpha_row, kEps, opt.faults);
      logits.array() += kStep * (adj.at_policy + adj.at_buffer).array() * r.array() * (1.0 - r.array());
    }
    if (err > worst) worst = err;
    worst_steps = std::max(worst_steps, steps);
  }
  return make(worst <= kTol, worst, kTol, "max steps used " + std::to_string(worst_steps) + " of 10000");
}

SuiteResult tabular_dpi(const SuiteOptions& opt) {
  nn::Rng rng(opt.seed);
  std::uniform_int_distribution<int> n_states(2, 10), n_actions(2, 5);
  constexpr double kGamma = 0.9;
  constexpr double kMonotoneTol = 1e-8;
  double worst_decrease = 0.0;    // most negative step in Q, reported as a positive number
  double worst_random_gap = -1e300;  // max over policies and states of J_random - J_converged
  double worst_contraction = 0.0;
  int unconverged = 0;
  std::string failure;
  for (int k = 0; k < 20; ++k) {
    const FiniteMdp mdp = env::random_finite_mdp(n_states(rng), n_actions(rng), kGamma, rng);
    const TabularActionDistribution q = env::random_distribution(mdp.n_states, mdp.n_actions, rng);
    for (auto mode : {dpi::ImprovementMode::exact_simplex, dpi::ImprovementMode::closed_form}) {
      dpi::DpiConfig cfg;
      cfg.alpha = 0.5;
      cfg.improvement_mode = mode;
      cfg.monotone_tol = kMonotoneTol;
      // The closed-form step only contracts linearly toward the fixed point.
      if (mode == dpi::ImprovementMode::closed_form) cfg.max_iters = 20000;
      dpi::DpiTrace trace;
      try {
        trace = dpi::run_dpi(mdp, q, cfg, TabularPolicy::uniform(mdp.n_states, mdp.n_actions));
      } catch (const dpi::MonotonicityViolation& e) {
        failure = e.what();
        worst_decrease = std::max(worst_decrease, 1.0);
        continue;
      }
      if (!trace.converged) ++unconverged;
      for (std::size_t i = 1; i < trace.iterations.size(); ++i) {
        const double step = (trace.iterations[i].q - trace.iterations[i - 1].q).minCoeff();
        worst_decrease = std::max(worst_decrease, -step);
      }
      if (mode != dpi::ImprovementMode::exact_simplex) continue;
      const Vec& j_star = trace.iterations.back().j;
      const EntropyWeights w{cfg.alpha, cfg.beta};
      for (int trial = 0; trial < 10000; ++trial) {
        const TabularPolicy pi = env::random_distribution(mdp.n_states, mdp.n_actions, rng);
        const QTable qt = evaluate_diverse_q(mdp, pi, q, w);
        for (int s = 0; s < mdp.n_states; ++s) {
          const double j = cfg.beta * diverse_state_value(qt, pi, q, cfg.alpha, s);
          worst_random_gap = std::max(worst_random_gap, j - j_star[s]);
        }
      }
    }
    std::normal_distribution<double> normal(0.0, 10.0);
    const TabularPolicy pi = env::random_distribution(mdp.n_states, mdp.n_actions, rng);
    for (int pair = 0; pair < 5; ++pair) {
      QTable a(mdp.n_states, mdp.n_actions), b(mdp.n_states, mdp.n_actions);
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        a.data()[i] = normal(rng);
        b.data()[i] = normal(rng);
      }
      const EntropyWeights w{0.5, 1.0};
      const double before = (a - b).cwiseAbs().maxCoeff();
      const double after = (bellman_backup(a, mdp, pi, q, w) - bellman_backup(b, mdp, pi, q, w)).cwiseAbs().maxCoeff();
      worst_contraction = std::max(worst_contraction, after / before);
    }
  }
  const bool passed = worst_decrease <= kMonotoneTol && worst_random_gap <= 1e-9 &&
                      worst_contraction <= kGamma * (1.0 + 1e-12) && unconverged == 0 && failure.empty();
  std::string detail = "random-policy margin " + format_double(worst_random_gap) + " (tol 1e-9), contraction " +
                       format_double(worst_contraction) + " (tol " + format_double(kGamma) + "), unconverged " +
                       std::to_string(unconverged);
  if (!failure.empty()) detail += ", " + failure;
  return make(passed, worst_decrease, kMonotoneTol, detail);
}

SuiteResult gradient_equivalence(const SuiteOptions& opt) {
  nn::Rng rng(opt.seed);
  std::uniform_int_distribution<int> size(2, 8);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> alpha_dist(0.05, 0.95), beta_dist(0.5, 2.0);
  double worst_cos = 0.0;  // 1 - cosine
  double worst_fd = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int n = size(rng);
    Vec q_row(n), theta(n);
    for (int i = 0; i < n; ++i) {
      q_row[i] = 2.0 * normal(rng);
      theta[i] = normal(rng);
    }
    const Vec buffer = dirichlet(n, rng);
    const double alpha = alpha_dist(rng);
    const double beta = beta_dist(rng);
    const Vec pi_old = dpi::softmax(theta);
    const Vec ratio = entropy::ratio_closed_form(entropy::DiscreteDistPair(pi_old, buffer), entropy::MixtureWeight(alpha));
    const Vec g_full = dpi::full_objective_gradient(theta, q_row, buffer, alpha, beta);
    const Vec g_sur = dpi::surrogate_objective_gradient(theta, q_row, ratio, alpha, beta);
    const double cosine = g_full.dot(g_sur) / (g_full.norm() * g_sur.norm());
    worst_cos = std::max(worst_cos, 1.0 - cosine);
    const Vec fd_full = central_difference(
        [&](const Vec& t) { return dpi::full_objective(t, q_row, buffer, alpha, beta); }, theta, 1e-6);
    const Vec fd_sur = central_difference(
        [&](const Vec& t) { return dpi::surrogate_objective(t, q_row, ratio, alpha, beta); }, theta, 1e-6);
    worst_fd = std::max({worst_fd, relative_error(g_full, fd_full), relative_error(g_sur, fd_sur)});
  }
  const bool passed = worst_cos <= 1e-9 && worst_fd <= 1e-4;
  return make(passed, worst_cos, 1e-9,
              "1 - cosine shown; worst finite-difference relative error " + format_double(worst_fd) + " (tol 1e-4)");
}

SuiteResult toy_example(const SuiteOptions&) {
  const dpi::ToyResult r = dpi::toy_example(10);
  const double mass = r.dac_policy[9];
  const double mix_dev = (r.dac_mixture.array() - 0.1).abs().maxCoeff();
  const bool steps_ok = std::abs(r.dac_expected_steps - 1.0) <= 1e-12 && std::abs(r.uniform_expected_steps - 10.0) <= 1e-12;
  const bool passed = mass >= 0.999 && steps_ok && mix_dev <= 1e-6;
  return make(passed, mass, 0.999,
              "mass on the unseen action (minimum shown); expected steps " + format_double(r.dac_expected_steps) +
                  " vs " + format_double(r.uniform_expected_steps) + ", mixture deviation from uniform " +
                  format_double(mix_dev));
}

}  // namespace dac::verify
