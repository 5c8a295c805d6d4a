#include "dac/finite_mdp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dac {

namespace {

void check_inputs(const FiniteMdp& mdp, const TabularPolicy& pi, const TabularActionDistribution& q,
                  EntropyWeights w) {
  mdp.validate();
  pi.validate("policy");
  q.validate("buffer action distribution");
  require(pi.n_states() == mdp.n_states && pi.n_actions() == mdp.n_actions,
          "policy shape does not match the MDP");
  require(q.n_states() == mdp.n_states && q.n_actions() == mdp.n_actions,
          "buffer distribution shape does not match the MDP");
  require(w.alpha >= 0.0 && w.alpha <= 1.0, "alpha must lie in [0, 1]");
  require(w.beta > 0.0 && std::isfinite(w.beta), "beta must be positive");
}

Vec state_bonus(const TabularPolicy& pi, const TabularActionDistribution& q, double alpha) {
  const entropy::MixtureWeight a(alpha);
  Vec h(pi.n_states());
  for (int s = 0; s < pi.n_states(); ++s) {
    h[s] = entropy::mixture_entropy(entropy::DiscreteDistPair(pi.row(s), q.row(s)), a);
  }
  return h;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

FiniteMdp::FiniteMdp(int states, int actions, double discount)
    : n_states(states),
      n_actions(actions),
      transition(Mat::Zero(static_cast<Eigen::Index>(states) * actions, states)),
      reward(Mat::Zero(states, actions)),
      gamma(discount),
      initial_state_dist(Vec::Constant(states, 1.0 / states)) {
  require(states > 0 && actions > 0, "MDP needs at least one state and one action");
}

void FiniteMdp::validate() const {
  require(n_states > 0 && n_actions > 0, "MDP needs at least one state and one action");
  require(transition.rows() == static_cast<Eigen::Index>(n_states) * n_actions &&
              transition.cols() == n_states,
          "transition table has the wrong shape");
  require(reward.rows() == n_states && reward.cols() == n_actions, "reward table has the wrong shape");
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(reward.allFinite(), "reward table has non-finite entries");
  for (Eigen::Index r = 0; r < transition.rows(); ++r) {
    entropy::validate_probability_row(transition.row(r).transpose(), "transition row");
  }
  require(initial_state_dist.size() == n_states, "initial distribution has the wrong length");
  entropy::validate_probability_row(initial_state_dist, "initial distribution");
}

TabularDistribution TabularDistribution::uniform(int n_states, int n_actions) {
  require(n_states > 0 && n_actions > 0, "uniform table needs positive dimensions");
  return TabularDistribution(Mat::Constant(n_states, n_actions, 1.0 / n_actions));
}

void TabularDistribution::validate(const std::string& what) const {
  require(probs.rows() > 0 && probs.cols() > 0, what + ": empty table");
  for (Eigen::Index s = 0; s < probs.rows(); ++s) {
    entropy::validate_probability_row(probs.row(s).transpose(), what);
  }
}

double diverse_state_value(const QTable& q_table, const TabularPolicy& pi,
                           const TabularActionDistribution& q, double alpha, int s) {
  const Vec pi_row = pi.row(s);
  const entropy::DiscreteDistPair pair(pi_row, q.row(s));
  return pi_row.dot(q_table.row(s).transpose()) +
         entropy::mixture_entropy(pair, entropy::MixtureWeight(alpha));
}

double diverse_state_value_ratio_form(const QTable& q_table, const TabularPolicy& pi,
                                      const TabularActionDistribution& q, double alpha, int s) {
  const entropy::DiscreteDistPair pair(pi.row(s), q.row(s));
  const entropy::MixtureWeight a(alpha);
  const Vec ratio = entropy::ratio_closed_form(pair, a);
  double policy_part = 0.0;
  double buffer_part = 0.0;
  for (Eigen::Index i = 0; i < ratio.size(); ++i) {
    const double p = pair.pi()[i];
    const double b = pair.q()[i];
    if (p > 0.0) {
      double v = q_table(s, i);
      if (alpha > 0.0) v += alpha * entropy::log_ratio_excess(p, b, ratio[i], alpha);
      policy_part += p * v;
    }
    if (alpha < 1.0 && b > 0.0) buffer_part += b * entropy::log_ratio_excess(p, b, ratio[i], alpha);
  }
  return policy_part + (1.0 - alpha) * buffer_part;
}

QTable bellman_backup(const QTable& q_table, const FiniteMdp& mdp, const TabularPolicy& pi,
                      const TabularActionDistribution& q, EntropyWeights w) {
  check_inputs(mdp, pi, q, w);
  require(q_table.rows() == mdp.n_states && q_table.cols() == mdp.n_actions,
          "Q table shape does not match the MDP");
  Vec v(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) v[s] = diverse_state_value_ratio_form(q_table, pi, q, w.alpha, s);
  const Vec expected_next = mdp.transition * v;
  QTable out(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      out(s, a) = mdp.reward(s, a) / w.beta + mdp.gamma * expected_next[mdp.row(s, a)];
    }
  }
  return out;
}

QTable evaluate_diverse_q(const FiniteMdp& mdp, const TabularPolicy& pi,
                          const TabularActionDistribution& q, EntropyWeights w) {
  check_inputs(mdp, pi, q, w);
  const Eigen::Index n = static_cast<Eigen::Index>(mdp.n_states) * mdp.n_actions;

  // (I - gamma P Pi) x = r / beta + gamma P h, unknowns ordered as rows of P.
  Mat policy_map = Mat::Zero(mdp.n_states, n);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) policy_map(s, mdp.row(s, a)) = pi.probs(s, a);
  }
  const Mat system = Mat::Identity(n, n) - mdp.gamma * mdp.transition * policy_map;
  const Vec h = state_bonus(pi, q, w.alpha);
  Vec rhs(n);
  const Vec bonus_next = mdp.transition * h;
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      rhs[mdp.row(s, a)] = mdp.reward(s, a) / w.beta + mdp.gamma * bonus_next[mdp.row(s, a)];
    }
  }
  Eigen::FullPivLU<Mat> lu(system);
  if (!lu.isInvertible()) throw NumericalError("diverse evaluation system is singular");
  const Vec x = lu.solve(rhs);
  if (!x.allFinite()) throw NumericalError("diverse evaluation produced non-finite values");

  QTable out(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) out(s, a) = x[mdp.row(s, a)];
  }
  return out;
}

FiniteMdp read_finite_mdp(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto next_record = [&](std::istringstream& fields) {
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      fields.clear();
      fields.str(line);
      return true;
    }
    return false;
  };
  auto fail = [&](const std::string& why) {
    throw ValidationError("MDP file line " + std::to_string(line_no) + ": " + why);
  };

  std::istringstream fields;
  if (!next_record(fields)) throw ValidationError("MDP file is empty");
  int n_states = 0, n_actions = 0;
  double gamma = 0.0;
  if (!(fields >> n_states >> n_actions >> gamma)) fail("expected header 'S A gamma'");
  if (n_states <= 0 || n_actions <= 0) fail("state and action counts must be positive");
  FiniteMdp mdp(n_states, n_actions, gamma);
  bool saw_initial = false;
  Vec initial = Vec::Zero(n_states);

  auto check_state = [&](int s) { if (s < 0 || s >= n_states) fail("state index out of range"); };
  auto check_action = [&](int a) { if (a < 0 || a >= n_actions) fail("action index out of range"); };

  while (next_record(fields)) {
    std::string tag;
    fields >> tag;
    if (tag == "T") {
      int s, a, next;
      double p;
      if (!(fields >> s >> a >> next >> p)) fail("malformed T record");
      check_state(s), check_action(a), check_state(next);
      mdp.transition(mdp.row(s, a), next) = p;
    } else if (tag == "R") {
      int s, a;
      double r;
      if (!(fields >> s >> a >> r)) fail("malformed R record");
      check_state(s), check_action(a);
      mdp.reward(s, a) = r;
    } else if (tag == "I") {
      int s;
      double p;
      if (!(fields >> s >> p)) fail("malformed I record");
      check_state(s);
      initial[s] = p;
      saw_initial = true;
    } else {
      fail("unknown record tag '" + tag + "'");
    }
  }
  if (saw_initial) mdp.initial_state_dist = initial;
  mdp.validate();
  return mdp;
}

FiniteMdp load_finite_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open MDP file " + path);
  return read_finite_mdp(in);
}

void write_finite_mdp(std::ostream& out, const FiniteMdp& mdp) {
  out << mdp.n_states << ' ' << mdp.n_actions << ' ' << format_real(mdp.gamma) << '\n';
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      for (int next = 0; next < mdp.n_states; ++next) {
        const double p = mdp.p(s, a, next);
        if (p != 0.0) out << "T " << s << ' ' << a << ' ' << next << ' ' << format_real(p) << '\n';
      }
    }
  }
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      out << "R " << s << ' ' << a << ' ' << format_real(mdp.reward(s, a)) << '\n';
    }
  }
  for (int s = 0; s < mdp.n_states; ++s) {
    if (mdp.initial_state_dist[s] != 0.0) {
      out << "I " << s << ' ' << format_real(mdp.initial_state_dist[s]) << '\n';
    }
  }
}

void save_finite_mdp(const std::string& path, const FiniteMdp& mdp) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write MDP file " + path);
  write_finite_mdp(out, mdp);
}

}  // namespace dac
