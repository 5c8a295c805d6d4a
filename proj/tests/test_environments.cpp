#include "dac/env/environment.hpp"
#include "dac/env/maze.hpp"
#include "dac/env/simple.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace dac;
using namespace dac::env;

namespace {

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

/// Constant reward of 1 per step for a fixed number of steps.
class ConstantReward final : public Environment {
 public:
  explicit ConstantReward(int length) : length_(length) {}
  Vec reset() override {
    t_ = 0;
    return Vec::Zero(1);
  }
  StepResult step(const Vec&) override {
    ++t_;
    return StepResult{Vec::Zero(1), 1.0, t_ >= length_, false};
  }
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  std::string name() const override { return "constant"; }
  EnvPtr clone() const override { return std::make_unique<ConstantReward>(*this); }

 private:
  int length_;
  int t_ = 0;
};

/// Parametric entry time of the segment p + t d, t in [0, 1], into the closed
/// rectangle, or +inf. Independent slab test used as an oracle.
double entry_time(const Rect& r, double px, double py, double dx, double dy) {
  double t0 = 0.0, t1 = 1.0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {px - r.x0, r.x1 - px, py - r.y0, r.y1 - py};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return INFINITY;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return INFINITY;
  }
  return t0;
}

}  // namespace

TEST_CASE("maze geometry") {
  const MazeGeometry g;
  CHECK(g.walls().size() >= 4);
  CHECK(g.is_free(0.5, 0.5));
  CHECK_FALSE(g.is_free(50.5, 10.0));
  CHECK(g.is_free(50.5, 25.0));   // lower door in the vertical wall
  CHECK(g.is_free(25.0, 50.5));   // left door in the horizontal wall
  CHECK(g.is_free(75.5, 50.5));   // right door
  CHECK(g.is_free(50.5, 75.5));   // upper door
  CHECK_FALSE(g.is_free(-0.1, 3.0));
  CHECK(g.room_of(10, 10) == 0);
  CHECK(g.room_of(90, 10) == 1);
  CHECK(g.room_of(10, 90) == 2);
  CHECK(g.room_of(90, 90) == 3);
  CHECK(g.room_of(50.5, 25.0) == -1);
  const int free_cells = g.free_cell_count();
  CHECK(free_cells < 100 * 100);
  CHECK(free_cells > 98 * 98);
}

TEST_CASE("maze moves") {
  const MazeGeometry g;
  const double skin = g.config().skin;
  SUBCASE("free translation") {
    const Vec p = g.move(v2(10, 10), v2(1, 0));
    CHECK(p[0] == doctest::Approx(11.0).epsilon(1e-15));
    CHECK(p[1] == 10.0);
  }
  SUBCASE("outer boundary") {
    const Vec p = g.move(v2(0.5, 0.5), v2(-1, 0));
    CHECK(p[0] == doctest::Approx(skin).epsilon(1e-9));
    CHECK(p[1] == 0.5);
  }
  SUBCASE("internal wall away from a door") {
    const Vec p = g.move(v2(49.5, 10.0), v2(1, 0));
    CHECK(p[0] == doctest::Approx(50.0 - skin).epsilon(1e-12));
    CHECK(p[1] == 10.0);
  }
  SUBCASE("through a door") {
    const Vec p = g.move(v2(50.2, 25.0), v2(1, 0));
    CHECK(p[0] == doctest::Approx(51.2).epsilon(1e-15));
  }
  SUBCASE("actions are clamped") {
    const Vec p = g.move(v2(10, 10), v2(5, -3));
    CHECK(p[0] == doctest::Approx(11.0));
    CHECK(p[1] == doctest::Approx(9.0));
  }
}

TEST_CASE("maze moves never cross walls (fuzz)") {
  const MazeGeometry g;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> pos(0.0, 100.0), act(-1.0, 1.0);
  int checked = 0;
  while (checked < 100000) {
    const double x = pos(rng), y = pos(rng);
    if (!g.is_free(x, y)) continue;
    const Vec start = v2(x, y);
    const Vec end = g.move(start, v2(act(rng), act(rng)));
    REQUIRE(g.is_free(end[0], end[1]));
    const double dx = end[0] - x, dy = end[1] - y;
    for (const Rect& r : g.walls()) REQUIRE(std::isinf(entry_time(r, x, y, dx, dy)));
    ++checked;
  }
  // Also along a long random walk, where contact positions recur.
  Vec p = v2(0.5, 0.5);
  for (int i = 0; i < 100000; ++i) {
    const Vec next = g.move(p, v2(act(rng), act(rng)));
    for (const Rect& r : g.walls()) REQUIRE(std::isinf(entry_time(r, p[0], p[1], next[0] - p[0], next[1] - p[1])));
    p = next;
  }
}

TEST_CASE("maze episodes") {
  MazeConfig cfg;
  cfg.horizon = 5;
  Maze maze(cfg);
  CHECK(maze.reset() == v2(0.5, 0.5));
  for (int t = 1; t <= 5; ++t) {
    const StepResult r = maze.step(v2(1, 1));
    CHECK(r.reward == 0.0);
    CHECK_FALSE(r.terminal);
    CHECK(r.truncated == (t == 5));
  }
  CHECK(maze.name() == "maze");
  CHECK(maze.clone()->state_dim() == 2);
}

TEST_CASE("delayed reward wrapper") {
  SUBCASE("delay 1 is the identity") {
    std::mt19937_64 rng(1);
    Chain base(20.0, 100);
    DelayedReward wrapped(std::make_unique<Chain>(20.0, 100), 1);
    base.reset();
    wrapped.reset();
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 100; ++t) {
      const Vec a = Vec::Constant(1, u(rng));
      const StepResult x = base.step(a), y = wrapped.step(a);
      CHECK(x.reward == y.reward);
      if (x.terminal || x.truncated) break;
    }
  }
  SUBCASE("constant reward with delay 20") {
    DelayedReward wrapped(std::make_unique<ConstantReward>(1000), 20);
    wrapped.reset();
    for (int t = 1; t <= 100; ++t) CHECK(wrapped.step(Vec::Zero(1)).reward == (t % 20 == 0 ? 20.0 : 0.0));
  }
  SUBCASE("remaining reward is released when the episode ends") {
    DelayedReward wrapped(std::make_unique<ConstantReward>(25), 20);
    wrapped.reset();
    std::vector<double> rewards;
    for (int t = 1; t <= 25; ++t) rewards.push_back(wrapped.step(Vec::Zero(1)).reward);
    CHECK(rewards[19] == 20.0);
    CHECK(rewards[24] == 5.0);
    CHECK(std::count(rewards.begin(), rewards.end(), 0.0) == 23);
  }
  SUBCASE("total episode reward is conserved") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int delay : {3, 7, 20}) {
      for (int ep = 0; ep < 20; ++ep) {
        Chain base(20.0, 60);
        DelayedReward wrapped(std::make_unique<Chain>(20.0, 60), delay);
        base.reset();
        wrapped.reset();
        double a_sum = 0.0, b_sum = 0.0;
        for (;;) {
          const Vec a = Vec::Constant(1, u(rng) + 0.3);
          const StepResult x = base.step(a), y = wrapped.step(a);
          a_sum += x.reward;
          b_sum += y.reward;
          if (x.terminal || x.truncated) break;
        }
        CHECK(std::abs(a_sum - b_sum) < 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(DelayedReward(std::make_unique<Chain>(), 0), ValidationError);
}

TEST_CASE("sparse threshold wrapper") {
  SUBCASE("a predicate that never holds gives no reward") {
    SparseThreshold env(std::make_unique<Chain>(20.0, 50), [](const Vec&, const Vec&, const Vec&) { return false; });
    env.reset();
    for (int t = 0; t < 50; ++t) CHECK(env.step(Vec::Ones(1)).reward == 0.0);
  }
  SUBCASE("chain threshold") {
    SparseThreshold env(std::make_unique<Chain>(20.0, 50),
                        [](const Vec&, const Vec&, const Vec& next) { return next[0] >= 5.0; });
    env.reset();
    for (int t = 1; t <= 10; ++t) CHECK(env.step(Vec::Ones(1)).reward == (t >= 5 ? 1.0 : 0.0));
  }
  SUBCASE("maze upper-right room reached only after passing two doors") {
    const MazeGeometry g;
    SparseThreshold env(std::make_unique<Maze>(),
                        [&g](const Vec&, const Vec&, const Vec& next) { return g.room_of(next[0], next[1]) == 3; });
    env.reset();
    // Up to the lower door row, east through it, then north through the right door.
    std::vector<Vec> plan;
    for (int i = 0; i < 25; ++i) plan.push_back(v2(0, 1));
    for (int i = 0; i < 75; ++i) plan.push_back(v2(1, 0));
    for (int i = 0; i < 60; ++i) plan.push_back(v2(0, 1));
    double total = 0.0;
    bool crossed_vertical_wall = false;
    for (const Vec& a : plan) {
      const StepResult r = env.step(a);
      if (r.next_state[0] > 51.0) crossed_vertical_wall = true;
      if (r.reward > 0.0) CHECK(crossed_vertical_wall);
      total += r.reward;
    }
    CHECK(total > 0.0);
  }
}

TEST_CASE("chain and toy environments") {
  Chain chain(3.0, 10);
  chain.reset();
  StepResult r = chain.step(Vec::Constant(1, 1.0));
  CHECK(r.reward == 1.0);
  r = chain.step(Vec::Constant(1, -5.0));
  CHECK(r.reward == -1.0);
  CHECK(r.next_state[0] == 0.0);
  for (int i = 0; i < 3; ++i) r = chain.step(Vec::Constant(1, 1.0));
  CHECK(r.terminal);

  ContinuousToy toy(10);
  toy.reset();
  CHECK(toy.step(Vec::Constant(1, 0.3)).terminal);
  CHECK(toy.bin_of(-1.0) == 0);
  CHECK(toy.bin_of(1.0) == 9);
  CHECK(toy.bin_of(toy.unseen_lower_edge() + 1e-12) == 9);
  const ReplayBuffer buf = toy.preloaded_buffer(5);
  CHECK(buf.size() == 45);
  for (std::size_t i = 0; i < buf.size(); ++i) CHECK(toy.bin_of(buf.at(i).action[0]) < 9);

  const OneStepToy tab = one_step_toy(4);
  for (int a = 0; a < 4; ++a) CHECK(tab.mdp.p(0, a, 1) == 1.0);
  for (std::size_t i = 0; i < tab.buffer.size(); ++i) CHECK(tab.buffer.at(i).done);
}

TEST_CASE("visitation grid") {
  VisitationGrid grid = VisitationGrid::for_maze({});
  grid.record(v2(0.5, 0.5));
  CHECK(grid.count(0, 0) == 1);
  grid.record(v2(3.2, 7.9));
  grid.record(v2(3.8, 7.1));
  CHECK(grid.count(3, 7) == 2);
  CHECK(grid.unique_cells() == 2);
  CHECK(grid.total() == 3);
  grid.record(v2(100.0, 100.0));  // the far edge belongs to the last cell
  CHECK(grid.count(99, 99) == 1);
  CHECK_THROWS_AS(grid.record(v2(-0.5, 3.0)), ValidationError);
  CHECK_THROWS_AS(grid.record(v2(3.0, 100.5)), ValidationError);

  std::stringstream csv;
  grid.write_csv(csv);
  const VisitationGrid back = VisitationGrid::read_csv(csv);
  CHECK(back.unique_cells() == grid.unique_cells());
  CHECK(back.count(3, 7) == 2);

  std::stringstream pgm;
  grid.write_pgm(pgm);
  std::string magic;
  int w = 0, h = 0;
  pgm >> magic >> w >> h;
  CHECK(magic == "P2");
  CHECK(w == 100);
  CHECK(h == 100);
}

TEST_CASE("unique visits grow monotonically and stay below the free-cell count") {
  const MazeGeometry g;
  VisitationGrid grid = VisitationGrid::for_maze({});
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> act(-1.0, 1.0);
  Vec p = v2(0.5, 0.5);
  grid.record(p);
  int previous = grid.unique_cells();
  for (int i = 0; i < 300000; ++i) {
    p = g.move(p, v2(act(rng), act(rng)));
    grid.record(p);
    REQUIRE(grid.unique_cells() >= previous);
    previous = grid.unique_cells();
  }
  CHECK(previous <= g.free_cell_count());
  CHECK(previous > 100);
}
