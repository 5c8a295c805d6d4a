#include "dac/nn/adam.hpp"
#include "dac/nn/checkpoint.hpp"
#include "dac/nn/ema.hpp"
#include "dac/nn/gaussian_policy.hpp"
#include "dac/nn/mlp.hpp"
#include "dac/verify/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace dac;
using namespace dac::nn;

namespace {

Mat random_mat(int r, int c, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

}  // namespace

TEST_CASE("forward pass basics") {
  Mlp zero({3, 5, 2}, OutputActivation::linear);
  CHECK(zero.num_params() == 3 * 5 + 5 + 5 * 2 + 2);
  CHECK(zero.forward(Mat::Ones(3, 4)).isZero());

  Mlp identity({3, 3}, OutputActivation::linear);
  identity.weight(0) = Mat::Identity(3, 3);
  Rng rng(1);
  const Mat x = random_mat(3, 6, rng);
  CHECK(identity.forward(x) == x);

  Mlp sig({3, 3}, OutputActivation::sigmoid);
  CHECK((sig.forward(x).array() == 0.5).all());

  const Mlp net = Mlp::initialized({4, 16, 16, 3}, OutputActivation::linear, rng);
  for (int k = 0; k < 1000; ++k) CHECK(net.forward(random_mat(4, 1, rng, 10.0)).allFinite());
  CHECK_THROWS_AS(net.forward(Mat::Ones(5, 1)), ValidationError);
}

TEST_CASE("backward pass matches finite differences") {
  Rng rng(2);
  for (auto act : {OutputActivation::linear, OutputActivation::sigmoid}) {
    Mlp net = Mlp::initialized({3, 7, 5, 2}, act, rng);
    const Mat x = random_mat(3, 5, rng), adj = random_mat(2, 5, rng);
    ForwardCache cache;
    net.forward(x, cache);
    Vec g = Vec::Zero(net.num_params());
    const Mat dx = net.backward(cache, adj, &g);
    const Vec base = net.params();
    const Vec fd = verify::central_difference(
        [&](const Vec& p) {
          net.params() = p;
          return (net.forward(x).array() * adj.array()).sum();
        },
        base, 1e-6);
    net.params() = base;
    CHECK(verify::relative_error(g, fd) <= 1e-4);
    const Vec fd_x = verify::central_difference(
        [&](const Vec& v) { return (net.forward(Eigen::Map<const Mat>(v.data(), 3, 5)).array() * adj.array()).sum(); },
        Eigen::Map<const Vec>(x.data(), x.size()), 1e-6);
    CHECK(verify::relative_error(Eigen::Map<const Vec>(dx.data(), dx.size()), fd_x) <= 1e-4);
  }
}

TEST_CASE("gradient special cases") {
  Rng rng(3);
  Mlp net = Mlp::initialized({2, 4, 1}, OutputActivation::linear, rng);
  const Mat x = random_mat(2, 3, rng);
  ForwardCache cache;
  net.forward(x, cache);
  Vec g = Vec::Zero(net.num_params());
  net.backward(cache, Mat::Zero(1, 3), &g);
  CHECK(g.isZero());

  // Linear map y = W x + b with loss 0.5 |y - t|^2 has gradient (y - t) x^T.
  Mlp lin = Mlp::initialized({3, 2}, OutputActivation::linear, rng);
  const Mat xs = random_mat(3, 4, rng), t = random_mat(2, 4, rng);
  ForwardCache c2;
  const Mat y = lin.forward(xs, c2);
  Vec g2 = Vec::Zero(lin.num_params());
  lin.backward(c2, y - t, &g2);
  const Mat dw = (y - t) * xs.transpose();
  const Vec db = (y - t).rowwise().sum();
  CHECK((Eigen::Map<const Mat>(g2.data(), 2, 3) - dw).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((g2.tail(2) - db).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Gaussian policy sampling") {
  Rng rng(4);
  SUBCASE("minimum standard deviation makes the action the squashed mean") {
    GaussianPolicy policy = GaussianPolicy::initialized(2, 1, {8}, rng);
    Mlp& net = policy.net();
    // Drive the log-std output far below the clamp through its bias.
    net.bias(net.num_layers() - 1)[1] = -100.0;
    const Mat s = random_mat(2, 5, rng);
    const PolicySample sample = policy.sample(s, GaussianPolicy::standard_normal(1, 5, rng));
    CHECK((sample.actions - sample.mean.array().tanh().matrix()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((sample.log_std.array() == kLogStdMin).all());
    CHECK((policy.deterministic_action(s) - sample.mean.array().tanh().matrix()).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("the squashed density integrates to one") {
    GaussianPolicy policy = GaussianPolicy::initialized(1, 1, {8}, rng, true, 1.0, 1.0);
    const Mat s = Mat::Constant(1, 1, 0.3);
    const int n = 200000;
    Mat grid(1, n);
    const double h = 2.0 / n;
    for (int i = 0; i < n; ++i) grid(0, i) = -1.0 + (i + 0.5) * h;
    const RowVec lp = policy.log_prob(Mat::Constant(1, n, 0.3), grid);
    CHECK(std::abs(lp.array().exp().sum() * h - 1.0) < 1e-3);
  }
  SUBCASE("log density of replayed actions matches the sampled log density") {
    for (bool squash : {true, false}) {
      GaussianPolicy policy = GaussianPolicy::initialized(3, 2, {8, 8}, rng, squash, 1.0, 1.0);
      const Mat s = random_mat(3, 6, rng);
      const PolicySample sample = policy.sample(s, GaussianPolicy::standard_normal(2, 6, rng));
      CHECK((policy.log_prob(s, sample.actions) - sample.log_prob).cwiseAbs().maxCoeff() < 1e-6);
      CHECK((policy.log_prob(sample, sample.actions) - sample.log_prob).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
  SUBCASE("gradient of the expected log density under common noise") {
    GaussianPolicy policy = GaussianPolicy::initialized(2, 2, {6}, rng, true, 1.0, 1.0);
    const Mat s = random_mat(2, 8, rng);
    const Mat noise = GaussianPolicy::standard_normal(2, 8, rng);
    const RowVec w = RowVec::Constant(8, 1.0 / 8);
    const Vec g = policy.backward(policy.sample(s, noise), Mat::Zero(2, 8), w);
    const Vec base = policy.net().params();
    const Vec fd = verify::central_difference(
        [&](const Vec& p) {
          policy.net().params() = p;
          return policy.sample(s, noise).log_prob.mean();
        },
        base, 1e-6);
    CHECK(verify::relative_error(g, fd) <= 1e-3);
  }
  SUBCASE("standard normal draws fill columns in order") {
    Rng a(9), b(9);
    const Mat m = GaussianPolicy::standard_normal(2, 3, a);
    std::normal_distribution<double> n(0.0, 1.0);
    for (Eigen::Index i = 0; i < m.size(); ++i) CHECK(m.data()[i] == n(b));
  }
}

TEST_CASE("stable log(1 - tanh^2)") {
  for (double u : {-30.0, -3.0, -0.1, 0.0, 0.5, 4.0, 40.0}) {
    const double direct = std::log(4.0) - 2.0 * std::abs(u) - 2.0 * std::log1p(std::exp(-2.0 * std::abs(u)));
    CHECK(log_one_minus_tanh_sq(u) == doctest::Approx(direct).epsilon(1e-13));
  }
  CHECK(std::isfinite(log_one_minus_tanh_sq(500.0)));
}

TEST_CASE("EMA tracker") {
  const Vec src = Vec::Constant(3, 2.0);
  EmaTracker full(Vec::Zero(3), 1.0);
  full.update(src);
  CHECK(full.shadow() == src);
  EmaTracker frozen(Vec::Ones(3), 0.0);
  frozen.update(src);
  CHECK(frozen.shadow() == Vec::Ones(3));

  EmaTracker slow(Vec::Zero(3), 0.005);
  for (int k = 1; k <= 1000; ++k) {
    slow.update(src);
    const double expected = 2.0 * std::pow(0.995, k);
    CHECK(std::abs((src - slow.shadow())[0] - expected) < 1e-12);
  }
  CHECK_THROWS_AS(EmaTracker(Vec::Zero(1), 1.5), ValidationError);
}

TEST_CASE("Adam first step moves each coordinate by the learning rate") {
  Adam opt(3, AdamConfig{});
  Vec p = Vec::Zero(3), g(3);
  g << 1.0, -2.0, 0.5;
  opt.descend(p, g);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(std::abs(p[i]) - 3e-4) < 1e-11);
  CHECK(p[0] < 0.0);
  CHECK(p[1] > 0.0);
  Vec q = Vec::Zero(3);
  Adam up(3, AdamConfig{});
  up.ascend(q, g);
  CHECK((q + p).isZero());
  CHECK(opt.steps() == 1);
}

TEST_CASE("checkpoint round trip") {
  Rng rng(5);
  Checkpoint cp;
  cp.put("vec", Vec(random_mat(7, 1, rng)));
  cp.put("mat", random_mat(3, 4, rng));
  cp.put_scalar("tiny", 5e-324);
  cp.put_scalar("neg_zero", -0.0);
  const auto dir = std::filesystem::temp_directory_path() / "dac_checkpoint_test";
  std::filesystem::create_directories(dir);
  cp.save(dir / "cp");
  const Checkpoint back = Checkpoint::load(dir / "cp");
  CHECK(back == cp);
  CHECK(back.get_mat("mat") == cp.get_mat("mat"));
  CHECK(std::signbit(back.get_scalar("neg_zero")));
  CHECK(back.get_scalar("tiny") == 5e-324);
  CHECK_THROWS_AS(back.get_vec("missing"), ValidationError);

  // A manifest whose shape does not match the payload is rejected.
  {
    std::ofstream m(dir / "bad.manifest");
    m << "# dac-checkpoint v1\nx 1 100\n";
    std::ofstream b(dir / "bad.bin", std::ios::binary);
    b << "12345678";
  }
  CHECK_THROWS(Checkpoint::load(dir / "bad"));
  std::filesystem::remove_all(dir);
}
