#include "dac/env/simple.hpp"
#include "dac/finite_mdp.hpp"
#include "dac/verify/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace dac;

namespace {

double sup_norm(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

Mat random_table(int s, int a, std::mt19937_64& rng, double scale = 5.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat m(s, a);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

}  // namespace

TEST_CASE("MDP validation rejects malformed models") {
  FiniteMdp mdp(2, 2, 0.9);
  CHECK_THROWS_AS(mdp.validate(), ValidationError);  // zero transition rows
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) mdp.transition(mdp.row(s, a), 0) = 1.0;
  }
  CHECK_NOTHROW(mdp.validate());
  mdp.gamma = 1.0;
  CHECK_THROWS_AS(mdp.validate(), ValidationError);
  mdp.gamma = 0.9;
  mdp.transition(0, 1) = -0.1;
  mdp.transition(0, 0) = 1.1;
  CHECK_THROWS_AS(mdp.validate(), ValidationError);
  mdp.transition(0, 1) = 0.0;
  mdp.transition(0, 0) = 1.0;
  mdp.initial_state_dist = Vec::Constant(2, 0.6);
  CHECK_THROWS_AS(mdp.validate(), ValidationError);
}

TEST_CASE("discount zero leaves only the scaled reward") {
  std::mt19937_64 rng(1);
  FiniteMdp mdp = env::random_finite_mdp(4, 3, 0.0, rng);
  const auto pi = env::random_distribution(4, 3, rng);
  const auto q = env::random_distribution(4, 3, rng);
  for (double beta : {1.0, 2.5}) {
    const EntropyWeights w{0.4, beta};
    CHECK(sup_norm(evaluate_diverse_q(mdp, pi, q, w) - mdp.reward / beta) < 1e-15);
    CHECK(sup_norm(bellman_backup(random_table(4, 3, rng), mdp, pi, q, w) - mdp.reward / beta) < 1e-15);
  }
}

TEST_CASE("alpha = 1 evaluation equals an independent soft-Q evaluation") {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 10; ++k) {
    FiniteMdp mdp = env::random_finite_mdp(5, 3, 0.9, rng);
    const auto pi = env::random_distribution(5, 3, rng);
    const auto q = env::random_distribution(5, 3, rng);
    const double beta = 0.5 + k * 0.2;
    const QTable ours = evaluate_diverse_q(mdp, pi, q, EntropyWeights{1.0, beta});
    const QTable oracle = verify::soft_q_evaluation(mdp, pi, beta);
    CHECK(sup_norm(ours - oracle) <= 1e-10);
  }
}

TEST_CASE("linear-solve evaluation is the fixed point of the backup") {
  std::mt19937_64 rng(3);
  FiniteMdp mdp = env::random_finite_mdp(5, 3, 0.9, rng);
  const auto pi = env::random_distribution(5, 3, rng);
  const auto q = env::random_distribution(5, 3, rng);
  const EntropyWeights w{0.5, 1.0};
  const QTable exact = evaluate_diverse_q(mdp, pi, q, w);
  QTable iterated = QTable::Zero(5, 3);
  for (int i = 0; i < 500; ++i) iterated = bellman_backup(iterated, mdp, pi, q, w);
  CHECK(sup_norm(exact - iterated) < 1e-8);
  CHECK(sup_norm(bellman_backup(exact, mdp, pi, q, w) - exact) < 1e-10);
}

TEST_CASE("the backup is a gamma contraction in the sup norm") {
  std::mt19937_64 rng(4);
  FiniteMdp mdp = env::random_finite_mdp(6, 4, 0.8, rng);
  const auto pi = env::random_distribution(6, 4, rng);
  const auto q = env::random_distribution(6, 4, rng);
  for (int k = 0; k < 100; ++k) {
    const QTable a = random_table(6, 4, rng), b = random_table(6, 4, rng);
    const EntropyWeights w{0.5, 1.0};
    const double after = sup_norm(bellman_backup(a, mdp, pi, q, w) - bellman_backup(b, mdp, pi, q, w));
    CHECK(after <= mdp.gamma * sup_norm(a - b) * (1.0 + 1e-12));
  }
}

TEST_CASE("diverse state value special cases and cross-check") {
  std::mt19937_64 rng(5);
  const auto pi = env::random_distribution(3, 4, rng);
  const auto q = env::random_distribution(3, 4, rng);
  const QTable qt = random_table(3, 4, rng);
  for (int s = 0; s < 3; ++s) {
    const Vec p = pi.row(s);
    const double expected_q = p.dot(qt.row(s).transpose());
    CHECK(diverse_state_value(qt, pi, q, 1.0, s) ==
          doctest::Approx(expected_q + entropy::shannon_entropy(p)).epsilon(1e-14));
    CHECK(diverse_state_value(qt, pi, pi, 0.5, s) ==
          doctest::Approx(expected_q + entropy::shannon_entropy(p)).epsilon(1e-14));
    const double direct =
        expected_q + entropy::mixture_entropy(entropy::DiscreteDistPair(p, q.row(s)), entropy::MixtureWeight(0.3));
    CHECK(std::abs(diverse_state_value_ratio_form(qt, pi, q, 0.3, s) - direct) < 1e-12);
    CHECK(std::abs(diverse_state_value(qt, pi, q, 0.3, s) - direct) < 1e-12);
  }
}

TEST_CASE("MDP text format round-trips and reports bad input") {
  std::mt19937_64 rng(6);
  const FiniteMdp mdp = env::random_finite_mdp(3, 2, 0.95, rng);
  std::stringstream ss;
  write_finite_mdp(ss, mdp);
  const FiniteMdp back = read_finite_mdp(ss);
  CHECK(back.n_states == 3);
  CHECK(back.n_actions == 2);
  CHECK(back.gamma == mdp.gamma);
  CHECK(back.transition == mdp.transition);
  CHECK(back.reward == mdp.reward);
  CHECK(back.initial_state_dist == mdp.initial_state_dist);

  std::istringstream bad_tag("2 1 0.9\nX 0 0 0 1\n");
  CHECK_THROWS_AS(read_finite_mdp(bad_tag), ValidationError);
  std::istringstream bad_state("2 1 0.9\nT 0 0 5 1\n");
  CHECK_THROWS_AS(read_finite_mdp(bad_state), ValidationError);
  std::istringstream empty("# only a comment\n");
  CHECK_THROWS_AS(read_finite_mdp(empty), ValidationError);
  CHECK_THROWS_AS(load_finite_mdp("/nonexistent/file.mdp"), ValidationError);
}

TEST_CASE("bundled six-state MDP loads") {
  const FiniteMdp mdp = load_finite_mdp(DAC_DATA_DIR "/six_state.mdp");
  CHECK(mdp.n_states == 6);
  CHECK(mdp.n_actions == 3);
  CHECK(mdp.initial_state_dist[0] == 1.0);
}
