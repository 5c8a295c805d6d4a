#pragma once

#include "dac/common.hpp"
#include "dac/finite_mdp.hpp"
#include "dac/nn/checkpoint.hpp"
#include "dac/nn/mlp.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace dac {

struct Transition {
  Vec state;
  Vec action;
  double reward = 0.0;
  Vec next_state;
  bool done = false;
};

/// Column-stacked view of a set of transitions, ready for network evaluation.
struct Batch {
  Mat states;       // state_dim x M
  Mat actions;      // action_dim x M
  RowVec rewards;   // 1 x M
  Mat next_states;  // state_dim x M
  RowVec done;      // 1 x M, 1.0 for terminal transitions
  Eigen::Index size() const { return states.cols(); }
};

/// FIFO ring of transitions. Dimensions are fixed by the first push. Logical
/// index 0 is the oldest stored transition and size()-1 the newest.
class ReplayBuffer {
 public:
  static constexpr std::size_t kDefaultCapacity = 1'000'000;

  explicit ReplayBuffer(std::size_t capacity = kDefaultCapacity);

  void push(const Transition& t);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }
  /// Number of transitions ever pushed, including evicted ones.
  std::uint64_t total_pushes() const { return pushes_; }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }

  Transition at(std::size_t logical) const;

  /// `m` logical indices drawn uniformly with replacement from the newest
  /// min(window, size()) entries. With window >= size() the draws coincide
  /// bit for bit with sample_indices on the same generator state.
  std::vector<std::size_t> sample_recent_indices(std::size_t m, std::size_t window, nn::Rng& rng) const;
  std::vector<std::size_t> sample_indices(std::size_t m, nn::Rng& rng) const;

  std::vector<Transition> sample_minibatch(std::size_t m, nn::Rng& rng) const;
  std::vector<Transition> sample_recent_window(std::size_t m, std::size_t n_prime, nn::Rng& rng) const;

  Batch gather(const std::vector<std::size_t>& logical_indices) const;

  void dump(nn::Checkpoint& cp, const std::string& prefix = "buffer") const;
  static ReplayBuffer restore(const nn::Checkpoint& cp, const std::string& prefix = "buffer");

 private:
  std::size_t physical(std::size_t logical) const;

  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t next_ = 0;  // physical slot of the next write
  std::uint64_t pushes_ = 0;
  int state_dim_ = -1;
  int action_dim_ = -1;
  std::vector<double> states_;
  std::vector<double> actions_;
  std::vector<double> rewards_;
  std::vector<double> next_states_;
  std::vector<std::uint8_t> done_;
};

using StateIndexer = std::function<int(const Vec&)>;
using ActionIndexer = std::function<int(const Vec&)>;

/// Per-state normalized action counts N(s,a) / sum_a' N(s,a'). States with no
/// recorded transitions get the uniform row.
TabularActionDistribution empirical_action_distribution(const ReplayBuffer& buffer, const StateIndexer& state_index,
                                                        const ActionIndexer& action_index, int n_states,
                                                        int n_actions);

}  // namespace dac
