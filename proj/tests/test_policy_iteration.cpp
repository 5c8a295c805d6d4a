#include "dac/env/simple.hpp"
#include "dac/harness/csv.hpp"
#include "dac/policy_iteration.hpp"
#include "dac/verify/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace dac;
using namespace dac::dpi;

namespace {

Vec random_row(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = e(rng) + 1e-3;
  return v / v.sum();
}

double mixture_objective(const Vec& pi, const Vec& q_row, const Vec& buffer, double alpha) {
  double h = 0.0;
  for (Eigen::Index a = 0; a < pi.size(); ++a) {
    const double m = alpha * pi[a] + (1.0 - alpha) * buffer[a];
    if (m > 0.0) h -= m * std::log(m);
  }
  return pi.dot(q_row) + h;
}

}  // namespace

TEST_CASE("closed-form improvement on flat scores is uniform") {
  const QTable q = QTable::Constant(3, 4, 2.0);
  const Mat ratio = Mat::Constant(3, 4, 0.3);
  const TabularPolicy pi = improve_closed_form(q, ratio, 0.5);
  CHECK((pi.probs.array() - 0.25).abs().maxCoeff() < 1e-15);

  // Exact ratio for uniform pi and q is the constant alpha.
  const auto uniform = TabularPolicy::uniform(2, 5);
  const Mat r = ratio_table(uniform, uniform, 0.7);
  CHECK((r.array() - 0.7).abs().maxCoeff() < 1e-15);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> tiny(0.0, 1e-12);
  QTable qt(2, 5);
  for (Eigen::Index i = 0; i < qt.size(); ++i) qt.data()[i] = tiny(rng);
  CHECK((improve_closed_form(qt, r, 0.7).probs.array() - 0.2).abs().maxCoeff() < 1e-12);
}

TEST_CASE("closed-form improvement maximizes the surrogate objective") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    const int size = 2 + k % 5;
    Vec q_row(size);
    for (int a = 0; a < size; ++a) q_row[a] = n(rng);
    const Vec ratio = random_row(size, rng).cwiseMax(1e-3).cwiseMin(0.999);
    const double alpha = 0.2 + 0.02 * k;
    const Vec closed = improve_closed_form_row(q_row, ratio, alpha);
    auto grad = [&](const Vec& p) {
      Vec g(size);
      for (int a = 0; a < size; ++a) g[a] = q_row[a] + alpha * std::log(ratio[a]) - alpha * (std::log(p[a]) + 1.0);
      return g;
    };
    const MirrorAscentResult oracle = mirror_ascent(grad, Vec::Constant(size, 1.0 / size), 0.5, 1e-13, 200000);
    CHECK(oracle.converged);
    CHECK((closed - oracle.pi).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("the closed-form step fixes the exact maximizer when the ratio is its own") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    const int size = 3 + k % 4;
    Vec q_row(size);
    for (int a = 0; a < size; ++a) q_row[a] = n(rng);
    const Vec buffer = random_row(size, rng);
    const double alpha = 0.5;
    const Vec star = maximize_mixture_objective_row(q_row, buffer, alpha);
    const Vec ratio =
        entropy::ratio_closed_form(entropy::DiscreteDistPair(star, buffer), entropy::MixtureWeight(alpha));
    CHECK((improve_closed_form_row(q_row, ratio, alpha) - star).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("exact simplex improvement") {
  SUBCASE("alpha = 1 gives the softmax of Q") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 2.0);
    QTable q(3, 4);
    for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = n(rng);
    const auto buffer = env::random_distribution(3, 4, rng);
    const TabularPolicy pi = exact_simplex_improve(q, buffer, 1.0, 1.0);
    for (int s = 0; s < 3; ++s) CHECK((pi.row(s) - softmax(q.row(s).transpose())).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("uniform buffer and flat Q give the uniform policy") {
    const auto buffer = TabularActionDistribution::uniform(2, 3);
    const TabularPolicy pi = exact_simplex_improve(QTable::Constant(2, 3, -1.0), buffer, 0.4, 1.0);
    CHECK((pi.probs.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("two actions agree with a fine grid scan") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int k = 0; k < 5; ++k) {
      Vec q_row(2);
      q_row << n(rng), n(rng);
      const Vec buffer = random_row(2, rng);
      const double alpha = 0.3 + 0.1 * k;
      const Vec pi = maximize_mixture_objective_row(q_row, buffer, alpha);
      double best = -1e300, best_p = 0.0;
      for (int i = 0; i <= 1000000; ++i) {
        const double p = i * 1e-6;
        Vec cand(2);
        cand << p, 1.0 - p;
        const double v = mixture_objective(cand, q_row, buffer, alpha);
        if (v > best) {
          best = v;
          best_p = p;
        }
      }
      CHECK(std::abs(pi[0] - best_p) <= 2e-6);
      CHECK(mixture_objective(pi, q_row, buffer, alpha) >= best - 1e-12);
    }
  }
  SUBCASE("the maximizer beats random points of the simplex") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
      Vec q_row(5);
      for (int a = 0; a < 5; ++a) q_row[a] = n(rng);
      Vec buffer = random_row(5, rng);
      if (k % 3 == 0) {
        buffer[4] = 0.0;
        buffer /= buffer.sum();
      }
      const Vec pi = maximize_mixture_objective_row(q_row, buffer, 0.25);
      // Some rows leave an action out of the buffer; compare against random
      // points of the simplex.
      const double v = mixture_objective(pi, q_row, buffer, 0.25);
      for (int t = 0; t < 200; ++t) CHECK(mixture_objective(random_row(5, rng), q_row, buffer, 0.25) <= v + 1e-12);
    }
  }
}

TEST_CASE("diverse policy iteration") {
  std::mt19937_64 rng(7);
  const FiniteMdp mdp = env::random_finite_mdp(6, 3, 0.9, rng);
  const auto q = env::random_distribution(6, 3, rng);
  DpiConfig cfg;
  cfg.alpha = 0.5;
  const DpiTrace trace = run_dpi(mdp, q, cfg, TabularPolicy::uniform(6, 3));
  REQUIRE(trace.converged);
  const Vec& j_star = trace.iterations.back().j;

  SUBCASE("J is monotone across iterations") {
    for (std::size_t i = 1; i < trace.iterations.size(); ++i) {
      CHECK((trace.iterations[i].j - trace.iterations[i - 1].j).minCoeff() >= -1e-8);
      CHECK((trace.iterations[i].q - trace.iterations[i - 1].q).minCoeff() >= -1e-8);
    }
  }
  SUBCASE("converged J beats random policies in every state") {
    double worst = -1e300;
    for (int k = 0; k < 10000; ++k) {
      const auto pi = env::random_distribution(6, 3, rng);
      const QTable qt = evaluate_diverse_q(mdp, pi, q, EntropyWeights{0.5, 1.0});
      for (int s = 0; s < 6; ++s) worst = std::max(worst, diverse_state_value(qt, pi, q, 0.5, s) - j_star[s]);
    }
    CHECK(worst <= 1e-9);
  }
  SUBCASE("the optimum does not depend on the initial policy") {
    const DpiTrace other = run_dpi(mdp, q, cfg, env::random_distribution(6, 3, rng));
    REQUIRE(other.converged);
    CHECK((other.iterations.back().j - j_star).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("the closed-form variant reaches the same optimum") {
    DpiConfig slow = cfg;
    slow.improvement_mode = ImprovementMode::closed_form;
    slow.max_iters = 20000;
    const DpiTrace other = run_dpi(mdp, q, slow, TabularPolicy::uniform(6, 3));
    REQUIRE(other.converged);
    CHECK((other.iterations.back().j - j_star).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("alpha = 1 reproduces soft policy iteration") {
    DpiConfig soft = cfg;
    soft.alpha = 1.0;
    const DpiTrace t = run_dpi(mdp, q, soft, TabularPolicy::uniform(6, 3));
    REQUIRE(t.converged);
    const TabularPolicy oracle = verify::soft_policy_iteration(mdp, 1.0);
    CHECK((t.final_policy.probs - oracle.probs).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("trace CSV carries the schema line") {
    std::stringstream ss;
    write_trace_csv(ss, trace);
    const harness::CsvTable table = harness::read_csv(ss, "dpi-trace");
    CHECK(table.rows.size() == trace.iterations.size() * 6);
    CHECK(table.number(table.rows.size() - 1, "J") == j_star[5]);
  }
}

TEST_CASE("one-step toy problem") {
  const ToyResult ten = toy_example(10);
  CHECK(ten.alpha == doctest::Approx(0.1));
  CHECK(ten.dac_policy[9] >= 0.999);
  CHECK(std::abs(ten.dac_expected_steps - 1.0) < 1e-3);
  CHECK(ten.uniform_expected_steps == doctest::Approx(10.0).epsilon(1e-12));
  CHECK((ten.uniform_policy.array() - 0.1).abs().maxCoeff() < 1e-12);

  const ToyResult two = toy_example(2);
  CHECK(two.dac_policy[0] < 1e-9);
  CHECK(two.dac_policy[1] > 1.0 - 1e-9);
  CHECK((two.dac_mixture.array() - 0.5).abs().maxCoeff() < 1e-9);
  CHECK_THROWS_AS(toy_example(1), ValidationError);
}

TEST_CASE("surrogate and full objectives share the gradient at the old policy") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const int size = 3;
    Vec theta(size), q_row(size);
    for (int a = 0; a < size; ++a) {
      theta[a] = n(rng);
      q_row[a] = n(rng);
    }
    const Vec buffer = random_row(size, rng);
    const double alpha = 0.4, beta = 1.3;
    const Vec ratio =
        entropy::ratio_closed_form(entropy::DiscreteDistPair(softmax(theta), buffer), entropy::MixtureWeight(alpha));
    const Vec g_full = full_objective_gradient(theta, q_row, buffer, alpha, beta);
    const Vec g_sur = surrogate_objective_gradient(theta, q_row, ratio, alpha, beta);
    CHECK(g_full.dot(g_sur) / (g_full.norm() * g_sur.norm()) >= 0.999);
    const Vec fd = verify::central_difference(
        [&](const Vec& t) { return surrogate_objective(t, q_row, ratio, alpha, beta); }, theta, 1e-6);
    CHECK(verify::relative_error(g_sur, fd) <= 1e-4);
  }
}

TEST_CASE("configuration is validated") {
  DpiConfig cfg;
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.alpha = 0.5;
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
