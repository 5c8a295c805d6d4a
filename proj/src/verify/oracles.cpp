#include "dac/verify/oracles.hpp"

#include <cmath>

namespace dac::verify {

QTable soft_q_evaluation(const FiniteMdp& mdp, const TabularPolicy& pi, double beta, int sweeps) {
  QTable q = QTable::Zero(mdp.n_states, mdp.n_actions);
  Vec v(mdp.n_states);
  for (int it = 0; it < sweeps; ++it) {
    for (int s = 0; s < mdp.n_states; ++s) {
      double acc = 0.0;
      for (int a = 0; a < mdp.n_actions; ++a) {
        const double p = pi.probs(s, a);
        if (p > 0.0) acc += p * (q(s, a) - std::log(p));
      }
      v[s] = acc;
    }
    QTable next(mdp.n_states, mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int a = 0; a < mdp.n_actions; ++a) {
        next(s, a) = mdp.reward(s, a) / beta + mdp.gamma * mdp.transition.row(mdp.row(s, a)).dot(v);
      }
    }
    const double change = (next - q).cwiseAbs().maxCoeff();
    q = std::move(next);
    if (change < 1e-15) break;
  }
  return q;
}

TabularPolicy soft_policy_iteration(const FiniteMdp& mdp, double beta, double tol, int max_iters) {
  TabularPolicy pi = TabularPolicy::uniform(mdp.n_states, mdp.n_actions);
  for (int it = 0; it < max_iters; ++it) {
    const QTable q = soft_q_evaluation(mdp, pi, beta);
    Mat next(mdp.n_states, mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s) {
      const double top = q.row(s).maxCoeff();
      double z = 0.0;
      for (int a = 0; a < mdp.n_actions; ++a) z += std::exp(q(s, a) - top);
      for (int a = 0; a < mdp.n_actions; ++a) next(s, a) = std::exp(q(s, a) - top) / z;
    }
    const double change = (next - pi.probs).cwiseAbs().maxCoeff();
    pi.probs = std::move(next);
    if (change < tol) break;
  }
  return pi;
}

SacParams independent_sac_step(const agent::DacNetworks& nets, const agent::DacHyper& hyper,
                               const ReplayBuffer& buffer, nn::Rng& rng) {
  const int m = hyper.batch_size;
  const int sd = nets.state_dim();
  const int ad = nets.action_dim();
  const std::vector<std::size_t> idx = buffer.sample_indices(static_cast<std::size_t>(m), rng);
  const Mat noise = nn::GaussianPolicy::standard_normal(ad, m, rng);

  Mat s(sd, m), a(ad, m), s2(sd, m);
  Vec r(m), not_done(m);
  for (int k = 0; k < m; ++k) {
    const Transition t = buffer.at(idx[k]);
    s.col(k) = (t.state.array() - hyper.state_shift) * hyper.state_scale;
    s2.col(k) = (t.next_state.array() - hyper.state_shift) * hyper.state_scale;
    a.col(k) = t.action;
    r[k] = t.reward;
    not_done[k] = t.done ? 0.0 : 1.0;
  }
  auto join = [&](const Mat& actions) {
    Mat x(sd + ad, m);
    x << s, actions;
    return x;
  };

  const nn::GaussianPolicy& policy = nets.policy;
  const nn::PolicySample pi = policy.sample(s, noise);
  nn::ForwardCache c1d, c2d, c1p, c2p, cv;
  const Vec q1_d = nets.q1.forward(join(a), c1d).row(0).transpose();
  const Vec q2_d = nets.q2.forward(join(a), c2d).row(0).transpose();
  const Vec q1_p = nets.q1.forward(join(pi.actions), c1p).row(0).transpose();
  const Vec q2_p = nets.q2.forward(join(pi.actions), c2p).row(0).transpose();
  const Vec v = nets.value.forward(s, cv).row(0).transpose();
  nn::Mlp target = nets.value;
  target.params() = nets.value_ema.shadow();
  const Vec v_next = target.forward(s2).row(0).transpose();

  const Vec y = r / hyper.beta + hyper.gamma * not_done.cwiseProduct(v_next);
  Vec v_target(m);
  Mat d_q1_p = Mat::Zero(1, m), d_q2_p = Mat::Zero(1, m);
  for (int k = 0; k < m; ++k) {
    const bool first = q1_p[k] <= q2_p[k];
    v_target[k] = (first ? q1_p[k] : q2_p[k]) - pi.log_prob[k];
    (first ? d_q1_p : d_q2_p)(0, k) = 1.0 / m;
  }

  Vec g_q1 = Vec::Zero(nets.q1.num_params());
  Vec g_q2 = Vec::Zero(nets.q2.num_params());
  Vec g_v = Vec::Zero(nets.value.num_params());
  nets.q1.backward(c1d, ((q1_d - y) / m).transpose(), &g_q1);
  nets.q2.backward(c2d, ((q2_d - y) / m).transpose(), &g_q2);
  nets.value.backward(cv, ((v - v_target) / m).transpose(), &g_v);

  Mat d_action = nets.q1.backward(c1p, d_q1_p, nullptr).bottomRows(ad) +
                 nets.q2.backward(c2p, d_q2_p, nullptr).bottomRows(ad);
  const Vec g_pi = policy.backward(pi, d_action, RowVec::Constant(m, -1.0 / m));

  SacParams out{policy.net().params(), nets.q1.params(), nets.q2.params(), nets.value.params(),
                nets.value_ema.shadow()};
  const nn::AdamConfig cfg{hyper.learning_rate};
  nn::Adam(out.policy.size(), cfg).ascend(out.policy, g_pi);
  nn::Adam(out.q1.size(), cfg).descend(out.q1, g_q1);
  nn::Adam(out.q2.size(), cfg).descend(out.q2, g_q2);
  nn::Adam(out.value.size(), cfg).descend(out.value, g_v);
  out.value_target = (1.0 - hyper.tau) * out.value_target + hyper.tau * out.value;
  return out;
}

Vec central_difference(const std::function<double(const Vec&)>& f, const Vec& x, double step) {
  Vec g(x.size());
  Vec probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

double relative_error(const Vec& a, const Vec& b, double floor) {
  const double scale = std::max({a.norm(), b.norm(), floor});
  return (a - b).norm() / scale;
}

}  // namespace dac::verify
