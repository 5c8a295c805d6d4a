#include "dac/env/simple.hpp"
#include "dac/nn/checkpoint.hpp"
#include "dac/replay.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <doctest.h>

#include <cmath>
#include <set>

using namespace dac;

namespace {

Vec scalar(double x) { return Vec::Constant(1, x); }

/// Transition whose reward tags its push order.
Transition tagged(double tag) { return Transition{scalar(tag), scalar(0.0), tag, scalar(tag + 1.0), false}; }

}  // namespace

TEST_CASE("FIFO eviction") {
  ReplayBuffer buf(3);
  CHECK(buf.empty());
  buf.push(tagged(1));
  CHECK(buf.size() == 1);
  for (int i = 2; i <= 4; ++i) buf.push(tagged(i));
  CHECK(buf.size() == 3);
  CHECK(buf.total_pushes() == 4);
  CHECK(buf.at(0).reward == 2.0);
  CHECK(buf.at(1).reward == 3.0);
  CHECK(buf.at(2).reward == 4.0);
  CHECK_THROWS_AS(buf.at(3), ValidationError);
}

TEST_CASE("push validates dimensions and values") {
  ReplayBuffer buf(4);
  buf.push(tagged(0));
  Transition wide = tagged(1);
  wide.state = Vec::Zero(2);
  CHECK_THROWS_AS(buf.push(wide), ValidationError);
  Transition nan = tagged(1);
  nan.reward = std::nan("");
  CHECK_THROWS_AS(buf.push(nan), ValidationError);
  CHECK_THROWS_AS(ReplayBuffer(0), ValidationError);
}

TEST_CASE("capacity bound at the default size") {
  ReplayBuffer buf;
  CHECK(buf.capacity() == 1'000'000);
  for (int i = 0; i < 1'000'001; ++i) buf.push(tagged(i));
  CHECK(buf.size() == 1'000'000);
  CHECK(buf.at(0).reward == 1.0);
  CHECK(buf.at(buf.size() - 1).reward == 1'000'000.0);

  SUBCASE("a window of the newest 1000 only returns those") {
    nn::Rng rng(1);
    for (const auto& t : buf.sample_recent_window(5000, 1000, rng)) CHECK(t.reward >= 1'000'000.0 - 999.0);
  }
}

TEST_CASE("minibatch sampling") {
  SUBCASE("a single transition is returned every time") {
    ReplayBuffer buf(5);
    buf.push(tagged(7));
    nn::Rng rng(2);
    const auto batch = buf.sample_minibatch(4, rng);
    CHECK(batch.size() == 4);
    for (const auto& t : batch) CHECK(t.reward == 7.0);
  }
  SUBCASE("seeded draws repeat") {
    ReplayBuffer buf(50);
    for (int i = 0; i < 50; ++i) buf.push(tagged(i));
    nn::Rng a(3), b(3);
    CHECK(buf.sample_indices(64, a) == buf.sample_indices(64, b));
  }
  SUBCASE("draws are uniform (chi-square at the 0.01 level)") {
    ReplayBuffer buf(100);
    for (int i = 0; i < 100; ++i) buf.push(tagged(i));
    nn::Rng rng(4);
    std::vector<int> counts(100, 0);
    const int draws = 100000;
    for (std::size_t idx : buf.sample_indices(draws, rng)) ++counts[idx];
    double stat = 0.0;
    const double expected = draws / 100.0;
    for (int c : counts) stat += (c - expected) * (c - expected) / expected;
    const boost::math::chi_squared dist(99);
    CHECK(stat < boost::math::quantile(boost::math::complement(dist, 0.01)));
  }
  SUBCASE("sampling an empty buffer is an error") {
    ReplayBuffer buf(5);
    nn::Rng rng(5);
    CHECK_THROWS_AS(buf.sample_indices(1, rng), ValidationError);
  }
}

TEST_CASE("recent-window sampling") {
  ReplayBuffer buf(20);
  for (int i = 0; i < 30; ++i) buf.push(tagged(i));
  nn::Rng a(6), b(6);
  SUBCASE("a window covering the buffer draws exactly what plain sampling draws") {
    CHECK(buf.sample_recent_indices(100, 20, a) == buf.sample_indices(100, b));
    CHECK(buf.sample_recent_indices(100, 500, a) == buf.sample_indices(100, b));
  }
  SUBCASE("a window of one always gives the newest transition") {
    for (const auto& t : buf.sample_recent_window(10, 1, a)) CHECK(t.reward == 29.0);
  }
  SUBCASE("a window larger than the capacity is rejected") {
    CHECK_THROWS_AS(buf.sample_recent_window(1, 21, a), ValidationError);
  }
}

TEST_CASE("gather stacks transitions column-wise") {
  ReplayBuffer buf(10);
  for (int i = 0; i < 4; ++i) {
    Transition t = tagged(i);
    t.done = i == 2;
    buf.push(t);
  }
  const Batch b = buf.gather({3, 0, 2});
  CHECK(b.size() == 3);
  CHECK(b.rewards[0] == 3.0);
  CHECK(b.states(0, 1) == 0.0);
  CHECK(b.next_states(0, 2) == 3.0);
  CHECK(b.done[2] == 1.0);
  CHECK(b.done[0] == 0.0);
}

TEST_CASE("dump and restore preserve contents and order") {
  ReplayBuffer buf(4);
  for (int i = 0; i < 6; ++i) buf.push(tagged(i));
  nn::Checkpoint cp;
  buf.dump(cp);
  const ReplayBuffer back = ReplayBuffer::restore(cp);
  CHECK(back.size() == buf.size());
  CHECK(back.capacity() == buf.capacity());
  for (std::size_t i = 0; i < buf.size(); ++i) CHECK(back.at(i).reward == buf.at(i).reward);
}

TEST_CASE("empirical action distribution") {
  auto state_of = [](const Vec& s) { return static_cast<int>(s[0]); };
  auto action_of = [](const Vec& a) { return static_cast<int>(a[0]); };
  ReplayBuffer buf(10);
  for (int a : {0, 0, 1, 0}) buf.push(Transition{scalar(0), scalar(a), 0.0, scalar(0), false});
  const auto q = empirical_action_distribution(buf, state_of, action_of, 2, 2);
  CHECK(q.probs(0, 0) == 0.75);
  CHECK(q.probs(0, 1) == 0.25);
  CHECK(q.probs(1, 0) == 0.5);  // no data: uniform
  CHECK(q.probs(1, 1) == 0.5);

  const auto toy = env::one_step_toy(10);
  const auto qt = toy.buffer_distribution();
  for (int a = 0; a < 9; ++a) CHECK(qt.probs(0, a) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK(qt.probs(0, 9) == 0.0);
  const auto q2 = env::one_step_toy(2).buffer_distribution();
  CHECK(q2.probs(0, 0) == 1.0);
  CHECK(q2.probs(0, 1) == 0.0);
}
