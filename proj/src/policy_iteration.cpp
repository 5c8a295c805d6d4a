#include "dac/policy_iteration.hpp"

#include "dac/harness/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace dac::dpi {

namespace {

void check_alpha_improve(double alpha) {
  require(alpha > 0.0 && alpha <= 1.0, "policy improvement needs alpha in (0, 1]");
}

Vec normalized(Vec v) {
  const double total = v.sum();
  if (!(total > 0.0) || !std::isfinite(total)) throw NumericalError("cannot normalize policy row");
  return v / total;
}

}  // namespace

void DpiConfig::validate() const {
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  require(beta > 0.0, "beta must be positive");
  require(tol > 0.0, "tol must be positive");
  require(max_iters >= 1, "max_iters must be at least 1");
  require(monotone_tol >= 0.0, "monotone_tol must be nonnegative");
}

Mat ratio_table(const TabularPolicy& pi, const TabularActionDistribution& q, double alpha) {
  require(pi.probs.rows() == q.probs.rows() && pi.probs.cols() == q.probs.cols(),
          "policy and buffer tables differ in shape");
  Mat r(pi.probs.rows(), pi.probs.cols());
  const entropy::MixtureWeight a(alpha);
  for (int s = 0; s < pi.n_states(); ++s) {
    r.row(s) = entropy::ratio_closed_form(entropy::DiscreteDistPair(pi.row(s), q.row(s)), a).transpose();
  }
  return r;
}

Vec improve_closed_form_row(const Vec& q_row, const Vec& ratio_row, double alpha) {
  check_alpha_improve(alpha);
  require(q_row.size() == ratio_row.size(), "Q row and ratio row differ in length");
  const double neg_inf = -std::numeric_limits<double>::infinity();
  Vec score(q_row.size());
  for (Eigen::Index a = 0; a < score.size(); ++a) {
    require(ratio_row[a] >= 0.0 && ratio_row[a] <= 1.0, "ratio entries must lie in [0, 1]");
    score[a] = ratio_row[a] > 0.0 ? q_row[a] / alpha + std::log(ratio_row[a]) : neg_inf;
  }
  const double top = score.maxCoeff();
  if (!std::isfinite(top)) throw NumericalError("closed-form improvement has no admissible action");
  Vec w(score.size());
  for (Eigen::Index a = 0; a < w.size(); ++a) w[a] = std::exp(score[a] - top);
  return normalized(std::move(w));
}

TabularPolicy improve_closed_form(const QTable& q, const Mat& ratio_old, double alpha) {
  require(q.rows() == ratio_old.rows() && q.cols() == ratio_old.cols(), "Q and ratio tables differ in shape");
  Mat out(q.rows(), q.cols());
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    out.row(s) = improve_closed_form_row(q.row(s).transpose(), ratio_old.row(s).transpose(), alpha).transpose();
  }
  return TabularPolicy(std::move(out));
}

Vec maximize_mixture_objective_row(const Vec& q_row, const Vec& buffer_row, double alpha) {
  check_alpha_improve(alpha);
  require(q_row.size() == buffer_row.size(), "Q row and buffer row differ in length");
  const Eigen::Index n = q_row.size();
  const double top = q_row.maxCoeff();
  const Vec floor = (1.0 - alpha) * buffer_row;

  // lambda = top + alpha * t; mass(t) is continuous and decreasing.
  auto mix_at = [&](double t, Eigen::Index a) {
    return std::max(std::exp((q_row[a] - top) / alpha - t - 1.0), floor[a]);
  };
  auto mass = [&](double t) {
    double m = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) m += mix_at(t, a);
    return m;
  };
  double lo = -1.0;                                           // mass >= 1
  double hi = std::log(static_cast<double>(n) / alpha) - 1.0;  // mass <= 1
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (mass(mid) >= 1.0 ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  Vec pi(n);
  for (Eigen::Index a = 0; a < n; ++a) pi[a] = std::max(0.0, (mix_at(t, a) - floor[a]) / alpha);
  return normalized(std::move(pi));
}

TabularPolicy exact_simplex_improve(const QTable& q, const TabularActionDistribution& buffer,
                                    double alpha, double beta) {
  require(beta > 0.0, "beta must be positive");
  buffer.validate("buffer action distribution");
  require(q.rows() == buffer.probs.rows() && q.cols() == buffer.probs.cols(),
          "Q and buffer tables differ in shape");
  Mat out(q.rows(), q.cols());
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    out.row(s) = maximize_mixture_objective_row(q.row(s).transpose(), buffer.row(static_cast<int>(s)), alpha)
                     .transpose();
  }
  return TabularPolicy(std::move(out));
}

Vec mixture_objective_gradient(const Vec& pi, const Vec& q_row, const Vec& buffer_row, double alpha) {
  Vec g(pi.size());
  for (Eigen::Index a = 0; a < pi.size(); ++a) {
    const double mix = std::max(alpha * pi[a] + (1.0 - alpha) * buffer_row[a], 1e-300);
    g[a] = q_row[a] - alpha * (std::log(mix) + 1.0);
  }
  return g;
}

double frank_wolfe_gap(const Vec& pi, const Vec& gradient) {
  return gradient.maxCoeff() - pi.dot(gradient);
}

MirrorAscentResult mirror_ascent(const std::function<Vec(const Vec&)>& gradient, Vec start, double step,
                                 double gap_tol, int max_iters) {
  require(step > 0.0, "mirror ascent step must be positive");
  MirrorAscentResult result;
  result.pi = normalized(std::move(start));
  for (int it = 0; it < max_iters; ++it) {
    const Vec g = gradient(result.pi);
    result.gap = frank_wolfe_gap(result.pi, g);
    result.iterations = it;
    if (result.gap <= gap_tol) {
      result.converged = true;
      return result;
    }
    const double top = g.maxCoeff();
    Vec next(result.pi.size());
    for (Eigen::Index a = 0; a < next.size(); ++a) next[a] = result.pi[a] * std::exp(step * (g[a] - top));
    result.pi = normalized(std::move(next));
  }
  result.gap = frank_wolfe_gap(result.pi, gradient(result.pi));
  result.iterations = max_iters;
  result.converged = result.gap <= gap_tol;
  return result;
}

DpiTrace run_dpi(const FiniteMdp& mdp, const TabularActionDistribution& q, const DpiConfig& cfg,
                 const TabularPolicy& pi0) {
  cfg.validate();
  if (cfg.alpha <= 0.0) throw ValidationError("diverse policy iteration needs alpha > 0");
  const EntropyWeights weights{cfg.alpha, cfg.beta};

  DpiTrace trace;
  TabularPolicy pi = pi0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    QTable q_pi = evaluate_diverse_q(mdp, pi, q, weights);
    Vec j(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) j[s] = cfg.beta * diverse_state_value(q_pi, pi, q, cfg.alpha, s);

    if (!trace.iterations.empty()) {
      const DpiIterate& prev = trace.iterations.back();
      const double q_drop = (prev.q - q_pi).maxCoeff();
      const double j_drop = (prev.j - j).maxCoeff();
      if (q_drop > cfg.monotone_tol || j_drop > cfg.monotone_tol) {
        std::ostringstream msg;
        msg << "diverse policy iteration lost monotonicity at iteration " << it << ": Q dropped by "
            << q_drop << ", J dropped by " << j_drop;
        throw MonotonicityViolation(msg.str());
      }
    }

    TabularPolicy next = cfg.improvement_mode == ImprovementMode::closed_form
                             ? improve_closed_form(q_pi, ratio_table(pi, q, cfg.alpha), cfg.alpha)
                             : exact_simplex_improve(q_pi, q, cfg.alpha, cfg.beta);
    const double delta = (next.probs - pi.probs).cwiseAbs().maxCoeff();
    trace.iterations.push_back(DpiIterate{pi, std::move(q_pi), std::move(j), delta});
    pi = std::move(next);
    if (delta < cfg.tol) {
      trace.converged = true;
      break;
    }
  }
  trace.final_policy = pi;
  return trace;
}

void write_trace_csv(std::ostream& out, const DpiTrace& trace) {
  out << harness::schema_line("dpi-trace") << '\n';
  out << "iter,state,J,max_policy_delta\n";
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const DpiIterate& it = trace.iterations[i];
    for (Eigen::Index s = 0; s < it.j.size(); ++s) {
      harness::write_csv_row(out, {std::to_string(i), std::to_string(s), harness::format_double(it.j[s]),
                                   harness::format_double(it.max_policy_delta)});
    }
  }
}

ToyResult toy_example(int n_actions) {
  require(n_actions >= 2, "toy example needs at least two actions");
  ToyResult r;
  r.alpha = 1.0 / n_actions;
  r.buffer_row = Vec::Constant(n_actions, 1.0 / (n_actions - 1));
  r.buffer_row[n_actions - 1] = 0.0;
  const Vec flat_q = Vec::Zero(n_actions);

  r.dac_policy = maximize_mixture_objective_row(flat_q, r.buffer_row, r.alpha);
  r.dac_mixture = r.alpha * r.dac_policy + (1.0 - r.alpha) * r.buffer_row;
  r.uniform_policy = maximize_mixture_objective_row(flat_q, r.buffer_row, 1.0);

  auto expected_draws = [](double p) { return p > 0.0 ? 1.0 / p : std::numeric_limits<double>::infinity(); };
  r.dac_expected_steps = expected_draws(r.dac_policy[n_actions - 1]);
  r.uniform_expected_steps = expected_draws(r.uniform_policy[n_actions - 1]);
  return r;
}

Vec softmax(const Vec& logits) {
  const double top = logits.maxCoeff();
  Vec e = (logits.array() - top).exp().matrix();
  return e / e.sum();
}

namespace {

Vec softmax_chain(const Vec& pi, const Vec& d_pi) {
  const double mean = pi.dot(d_pi);
  return (pi.array() * (d_pi.array() - mean)).matrix();
}

}  // namespace

double full_objective(const Vec& theta, const Vec& q_row, const Vec& buffer_row, double alpha, double beta) {
  const Vec pi = softmax(theta);
  const Vec mix = alpha * pi + (1.0 - alpha) * buffer_row;
  return beta * (pi.dot(q_row) + entropy::shannon_entropy(mix));
}

Vec full_objective_gradient(const Vec& theta, const Vec& q_row, const Vec& buffer_row, double alpha,
                            double beta) {
  const Vec pi = softmax(theta);
  return beta * softmax_chain(pi, mixture_objective_gradient(pi, q_row, buffer_row, alpha));
}

double surrogate_objective(const Vec& theta, const Vec& q_row, const Vec& ratio_old, double alpha,
                           double beta) {
  const Vec pi = softmax(theta);
  double total = 0.0;
  for (Eigen::Index a = 0; a < pi.size(); ++a) {
    total += pi[a] * (q_row[a] + alpha * std::log(ratio_old[a]) - alpha * std::log(pi[a]));
  }
  return beta * total;
}

Vec surrogate_objective_gradient(const Vec& theta, const Vec& q_row, const Vec& ratio_old, double alpha,
                                 double beta) {
  const Vec pi = softmax(theta);
  Vec d_pi(pi.size());
  for (Eigen::Index a = 0; a < pi.size(); ++a) {
    d_pi[a] = q_row[a] + alpha * std::log(ratio_old[a]) - alpha * std::log(pi[a]) - alpha;
  }
  return beta * softmax_chain(pi, d_pi);
}

}  // namespace dac::dpi
