#include "dac/agent/training.hpp"
#include "dac/env/environment.hpp"
#include "dac/env/simple.hpp"
#include "dac/harness/csv.hpp"
#include "dac/sample_entropy.hpp"
#include "dac/verify/oracles.hpp"
#include "dac/verify/suites.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dac::verify {

namespace {

using harness::format_double;

SuiteResult make(bool passed, double measured, double tol, std::string detail = {}) {
  SuiteResult r;
  r.passed = passed;
  r.measured = format_double(measured);
  r.tolerance = format_double(tol);
  r.detail = std::move(detail);
  return r;
}

/// Buffer of random transitions with states around the origin.
ReplayBuffer random_buffer(int state_dim, int action_dim, int count, nn::Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> act(-0.95, 0.95), unit(0.0, 1.0);
  ReplayBuffer buf(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Transition t;
    t.state = Vec(state_dim);
    t.next_state = Vec(state_dim);
    t.action = Vec(action_dim);
    for (int j = 0; j < state_dim; ++j) {
      t.state[j] = normal(rng);
      t.next_state[j] = normal(rng);
    }
    for (int j = 0; j < action_dim; ++j) t.action[j] = act(rng);
    t.reward = normal(rng);
    t.done = unit(rng) < 0.2;
    buf.push(t);
  }
  return buf;
}

double max_abs_diff(const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

SuiteResult sac_reduction(const SuiteOptions& opt) {
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    nn::Rng rng(opt.seed + trial);
    agent::DacHyper hyper;
    hyper.alpha = 1.0;
    hyper.pin_ratio_to_one = true;
    hyper.hidden = {16, 16};
    hyper.batch_size = 32;
    hyper.state_shift = 0.3;
    hyper.state_scale = 1.7;
    const int sd = 3, ad = 2;
    agent::DacAgent dac(sd, ad, 1.0, hyper, rng);
    const ReplayBuffer buffer = random_buffer(sd, ad, 200, rng);
    const agent::DacNetworks before = dac.nets();

    nn::Rng rng_dac(opt.seed * 7 + trial);
    nn::Rng rng_sac = rng_dac;
    const SacParams sac = independent_sac_step(before, hyper, buffer, rng_sac);
    dac.train_step(buffer, rng_dac);
    const agent::DacNetworks& after = dac.nets();
    worst = std::max({worst, max_abs_diff(after.policy.net().params(), sac.policy),
                      max_abs_diff(after.q1.params(), sac.q1), max_abs_diff(after.q2.params(), sac.q2),
                      max_abs_diff(after.value.params(), sac.value),
                      max_abs_diff(after.value_ema.shadow(), sac.value_target)});
  }
  constexpr double kTol = 1e-10;
  return make(worst <= kTol, worst, kTol, "max parameter difference over policy, critics, value, target");
}

namespace {

struct GradientCheck {
  double worst = 0.0;
  std::string worst_name;
  void add(const std::string& name, double err) {
    if (err > worst) {
      worst = err;
      worst_name = name;
    }
  }
};

/// Finite-difference check of one network's parameters against an analytic gradient.
template <class Objective>
double fd_check(Vec& params, const Vec& analytic, Objective objective) {
  const Vec base = params;
  const Vec fd = central_difference(
      [&](const Vec& p) {
        params = p;
        return objective();
      },
      base, 1e-6);
  params = base;
  return relative_error(analytic, fd);
}

void check_mlp(nn::Rng& rng, GradientCheck& check) {
  std::uniform_int_distribution<int> width(1, 6), depth(1, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<int> sizes{width(rng)};
  const int layers = depth(rng);
  for (int l = 0; l < layers; ++l) sizes.push_back(width(rng) + 2);
  sizes.push_back(width(rng));
  const auto act = (rng() & 1) ? nn::OutputActivation::sigmoid : nn::OutputActivation::linear;
  nn::Mlp net = nn::Mlp::initialized(sizes, act, rng);
  const int batch = 4;
  Mat x(sizes.front(), batch), adj(sizes.back(), batch);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < adj.size(); ++i) adj.data()[i] = normal(rng);
  nn::ForwardCache cache;
  net.forward(x, cache);
  Vec g = Vec::Zero(net.num_params());
  const Mat dx = net.backward(cache, adj, &g);
  auto objective = [&]() { return (net.forward(x).array() * adj.array()).sum(); };
  check.add("mlp parameters", fd_check(net.params(), g, objective));
  const Vec x_flat = Eigen::Map<const Vec>(x.data(), x.size());
  const Vec fd_in = central_difference(
      [&](const Vec& v) {
        const Mat xi = Eigen::Map<const Mat>(v.data(), x.rows(), x.cols());
        return (net.forward(xi).array() * adj.array()).sum();
      },
      x_flat, 1e-6);
  check.add("mlp input", relative_error(Eigen::Map<const Vec>(dx.data(), dx.size()), fd_in));
}

void check_policy_head(nn::Rng& rng, GradientCheck& check) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int sd = 2, ad = 1 + static_cast<int>(rng() % 2), batch = 5;
  const bool squash = (rng() & 1) != 0;
  nn::GaussianPolicy policy = nn::GaussianPolicy::initialized(sd, ad, {6, 6}, rng, squash, 1.5, 1.0);
  Mat s(sd, batch), ga(ad, batch);
  RowVec glp(batch);
  for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < ga.size(); ++i) ga.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < batch; ++i) glp[i] = normal(rng);
  const Mat noise = nn::GaussianPolicy::standard_normal(ad, batch, rng);
  const nn::PolicySample sample = policy.sample(s, noise);
  const Vec g = policy.backward(sample, ga, glp);
  auto objective = [&]() {
    const nn::PolicySample p = policy.sample(s, noise);
    return (p.actions.array() * ga.array()).sum() + p.log_prob.dot(glp);
  };
  check.add(squash ? "squashed policy head" : "gaussian policy head", fd_check(policy.net().params(), g, objective));
}

void check_agent(nn::Rng& rng, int k, GradientCheck& check) {
  agent::DacHyper hyper;
  std::uniform_real_distribution<double> unit(0.1, 0.9);
  hyper.hidden = {6, 6};
  hyper.batch_size = 6;
  hyper.alpha_mode = k % 2 == 0 ? agent::AlphaMode::fixed : agent::AlphaMode::adaptive;
  hyper.alpha = unit(rng);
  hyper.gamma = 0.9;
  hyper.squash = k % 3 != 2;
  hyper.state_scale = 0.5 + unit(rng);
  const int sd = 1 + k % 3, ad = 1 + k % 2;
  agent::DacAgent dac(sd, ad, 1.0, hyper, rng);
  agent::DacNetworks& nets = dac.nets();
  // Move the target away from the online value network so the frozen-target
  // gradient is exercised with a nonzero residual.
  std::normal_distribution<double> normal(0.0, 0.3);
  for (Eigen::Index i = 0; i < nets.value_ema.shadow().size(); ++i) nets.value_ema.shadow()[i] += normal(rng);
  nets.sync_target();
  const ReplayBuffer buffer = random_buffer(sd, ad, 40, rng);
  const Batch batch = buffer.gather(buffer.sample_indices(static_cast<std::size_t>(hyper.batch_size), rng));
  const Mat noise = nn::GaussianPolicy::standard_normal(ad, hyper.batch_size, rng);

  const agent::StepTerms terms = agent::compute_terms(nets, hyper, batch, noise);
  const agent::StepGradients g = agent::loss_gradients(nets, hyper, terms);
  auto value_of = [&](auto field) {
    return [&, field]() {
      const agent::StepTerms t = agent::compute_terms(nets, hyper, batch, noise);
      return agent::loss_values(nets, hyper, t).*field;
    };
  };
  check.add("policy objective", fd_check(nets.policy.net().params(), g.policy, value_of(&agent::LossValues::obj_pi)));
  check.add("ratio objective", fd_check(nets.ratio.params(), g.ratio, value_of(&agent::LossValues::obj_ratio)));
  check.add("critic 1 loss", fd_check(nets.q1.params(), g.q1, value_of(&agent::LossValues::loss_q1)));
  check.add("critic 2 loss", fd_check(nets.q2.params(), g.q2, value_of(&agent::LossValues::loss_q2)));
  check.add("value loss", fd_check(nets.value.params(), g.value, value_of(&agent::LossValues::loss_v)));
  if (nets.has_alpha) {
    const double c = hyper.effective_control(ad);
    check.add("alpha loss", fd_check(nets.alpha.net().params(), g.alpha, [&]() {
                return agent::alpha_surrogate_loss(nets.alpha, terms.states, terms.policy_term, terms.buffer_term, c,
                                                   hyper.alpha_reg);
              }));
  }
}

}  // namespace

SuiteResult gradient_integrity(const SuiteOptions& opt) {
  nn::Rng rng(opt.seed);
  GradientCheck check;
  constexpr int kConfigs = 100;
  for (int k = 0; k < kConfigs; ++k) {
    check_mlp(rng, check);
    check_policy_head(rng, check);
    check_agent(rng, k, check);
  }
  constexpr double kTol = 1e-3;
  return make(check.worst <= kTol, check.worst, kTol,
              std::to_string(kConfigs) + " configurations; worst operation: " + check.worst_name);
}

SuiteResult alpha_adaptation(const SuiteOptions& opt) {
  nn::Rng rng(opt.seed);
  std::uniform_int_distribution<int> size(2, 6);
  std::uniform_real_distribution<double> control(-3.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double kReg = 1e-3;
  double worst_fd = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int n = size(rng);
    Vec pi(n), q(n);
    std::exponential_distribution<double> e(1.0);
    for (int i = 0; i < n; ++i) {
      pi[i] = e(rng) + 1e-3;
      q[i] = e(rng) + 1e-3;
    }
    pi /= pi.sum();
    q /= q.sum();
    const entropy::DiscreteDistPair pair(pi, q);
    const double c = control(rng);
    agent::AlphaHead head(nn::Mlp::initialized({1, 8, 8, 1}, nn::OutputActivation::linear, rng), 0.5, 0.99);
    Mat s(1, 1);
    s(0, 0) = normal(rng);

    auto exact_loss = [&]() {
      const double a = head.alpha(s)[0];
      return entropy::mixture_entropy(pair, entropy::MixtureWeight(a)) - a * c +
             0.5 * kReg * head.net().params().squaredNorm();
    };
    const double a = head.alpha(s)[0];
    const Vec ratio = entropy::ratio_closed_form(pair, entropy::MixtureWeight(a));
    double policy_term = 0.0, buffer_term = 0.0;
    for (int i = 0; i < n; ++i) {
      const double excess = entropy::log_ratio_excess(pi[i], q[i], ratio[i], a);
      policy_term += pi[i] * excess;
      buffer_term += q[i] * excess;
    }
    const Vec analytic = agent::alpha_surrogate_gradient(head, s, RowVec::Constant(1, policy_term),
                                                         RowVec::Constant(1, buffer_term), c, kReg);
    worst_fd = std::max(worst_fd, fd_check(head.net().params(), analytic, exact_loss));
  }

  // Range: heads with large weights evaluated far from the origin saturate the sigmoid.
  double lowest = 1.0, highest = 0.0;
  for (int k = 0; k < 200; ++k) {
    agent::AlphaHead head(nn::Mlp::initialized({2, 8, 1}, nn::OutputActivation::linear, rng, 50.0), 0.5, 0.99);
    Mat s(2, 64);
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = 100.0 * normal(rng);
    const RowVec a = head.alpha(s);
    lowest = std::min(lowest, a.minCoeff());
    highest = std::max(highest, a.maxCoeff());
  }
  // And along an adaptive training run on a delayed-reward chain.
  {
    agent::DacHyper hyper;
    hyper.alpha_mode = agent::AlphaMode::adaptive;
    hyper.hidden = {16, 16};
    hyper.batch_size = 32;
    hyper.horizon = 100;
    nn::Rng train_rng(opt.seed + 1);
    env::DelayedReward env(std::make_unique<env::Chain>(20.0, 100), 20);
    agent::DacAgent dac(1, 1, 1.0, hyper, train_rng);
    ReplayBuffer buffer(hyper.buffer_capacity);
    agent::TrainingOptions o;
    o.total_steps = 600;
    o.log_interval = 1;
    for (const auto& rec : agent::run_training(env, dac, buffer, o, train_rng)) {
      if (rec.gradient_steps == 0) continue;
      lowest = std::min(lowest, rec.metrics.mean_alpha);
      highest = std::max(highest, rec.metrics.mean_alpha);
    }
  }
  constexpr double kTol = 1e-4;
  const bool in_range = lowest >= 0.5 && highest <= 0.99;
  return make(worst_fd <= kTol && in_range, worst_fd, kTol,
              "alpha outputs observed in [" + format_double(lowest) + ", " + format_double(highest) + "]");
}

SuiteResult clip_contract(const SuiteOptions& opt) {
  agent::DacHyper hyper;
  hyper.alpha = 0.5;
  hyper.hidden = {32, 32};
  hyper.batch_size = 64;
  hyper.horizon = 200;
  hyper.gamma = 0.99;
  nn::Rng rng(opt.seed);
  env::Chain env(20.0, 200);
  agent::DacAgent dac(1, 1, 1.0, hyper, rng);
  dac.faults() = opt.faults;
  ReplayBuffer buffer(hyper.buffer_capacity);
  agent::TrainingOptions o;
  o.total_steps = 3000;
  o.log_interval = 50;
  double lo = 0.0, hi = 0.0;
  for (const auto& rec : agent::run_training(env, dac, buffer, o, rng)) {
    if (rec.gradient_steps == 0) continue;
    lo = std::min(lo, rec.metrics.buffer_term_min);
    hi = std::max(hi, rec.metrics.buffer_term_max);
  }
  const double bound = hyper.effective_clip_bound(1);
  const double worst = std::max(std::abs(lo), std::abs(hi));
  return make(worst <= bound, worst, bound,
              "buffer-action term of the value target ranged over [" + format_double(lo) + ", " + format_double(hi) + "]");
}

}  // namespace dac::verify
