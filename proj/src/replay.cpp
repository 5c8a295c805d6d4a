#include "dac/replay.hpp"

#include <cmath>
#include <random>

namespace dac {

namespace {

void append(std::vector<double>& dst, const Vec& v, std::size_t slot, int dim, bool grow) {
  if (grow) {
    dst.insert(dst.end(), v.data(), v.data() + dim);
  } else {
    std::copy(v.data(), v.data() + dim, dst.begin() + static_cast<std::ptrdiff_t>(slot * dim));
  }
}

bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  require(capacity > 0, "replay capacity must be positive");
}

void ReplayBuffer::push(const Transition& t) {
  if (state_dim_ < 0) {
    require(t.state.size() > 0 && t.action.size() > 0, "transition state and action must be nonempty");
    state_dim_ = static_cast<int>(t.state.size());
    action_dim_ = static_cast<int>(t.action.size());
  }
  require(t.state.size() == state_dim_ && t.next_state.size() == state_dim_, "transition state dimension mismatch");
  require(t.action.size() == action_dim_, "transition action dimension mismatch");
  require(all_finite(t.state) && all_finite(t.next_state) && all_finite(t.action) && std::isfinite(t.reward),
          "transition has non-finite entries");

  const bool grow = rewards_.size() < capacity_;
  append(states_, t.state, next_, state_dim_, grow);
  append(actions_, t.action, next_, action_dim_, grow);
  append(next_states_, t.next_state, next_, state_dim_, grow);
  if (grow) {
    rewards_.push_back(t.reward);
    done_.push_back(t.done ? 1 : 0);
  } else {
    rewards_[next_] = t.reward;
    done_[next_] = t.done ? 1 : 0;
  }
  next_ = (next_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
  ++pushes_;
}

std::size_t ReplayBuffer::physical(std::size_t logical) const {
  const std::size_t oldest = size_ < capacity_ ? 0 : next_;
  return (oldest + logical) % capacity_;
}

Transition ReplayBuffer::at(std::size_t logical) const {
  require(logical < size_, "replay index out of range");
  const std::size_t p = physical(logical);
  Transition t;
  t.state = Eigen::Map<const Vec>(states_.data() + p * state_dim_, state_dim_);
  t.action = Eigen::Map<const Vec>(actions_.data() + p * action_dim_, action_dim_);
  t.next_state = Eigen::Map<const Vec>(next_states_.data() + p * state_dim_, state_dim_);
  t.reward = rewards_[p];
  t.done = done_[p] != 0;
  return t;
}

std::vector<std::size_t> ReplayBuffer::sample_recent_indices(std::size_t m, std::size_t window,
                                                             nn::Rng& rng) const {
  require(size_ > 0, "cannot sample from an empty replay buffer");
  require(window > 0, "sampling window must be positive");
  const std::size_t w = std::min(window, size_);
  const std::size_t base = size_ - w;
  std::uniform_int_distribution<std::size_t> pick(0, w - 1);
  std::vector<std::size_t> out(m);
  for (auto& i : out) i = base + pick(rng);
  return out;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t m, nn::Rng& rng) const {
  return sample_recent_indices(m, std::max<std::size_t>(size_, 1), rng);
}

std::vector<Transition> ReplayBuffer::sample_minibatch(std::size_t m, nn::Rng& rng) const {
  std::vector<Transition> out;
  out.reserve(m);
  for (auto i : sample_indices(m, rng)) out.push_back(at(i));
  return out;
}

std::vector<Transition> ReplayBuffer::sample_recent_window(std::size_t m, std::size_t n_prime, nn::Rng& rng) const {
  require(n_prime <= capacity_, "window cannot exceed the buffer capacity");
  std::vector<Transition> out;
  out.reserve(m);
  for (auto i : sample_recent_indices(m, n_prime, rng)) out.push_back(at(i));
  return out;
}

Batch ReplayBuffer::gather(const std::vector<std::size_t>& idx) const {
  const auto m = static_cast<Eigen::Index>(idx.size());
  Batch b;
  b.states.resize(state_dim_, m);
  b.actions.resize(action_dim_, m);
  b.next_states.resize(state_dim_, m);
  b.rewards.resize(m);
  b.done.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    require(idx[k] < size_, "replay index out of range");
    const std::size_t p = physical(idx[k]);
    b.states.col(k) = Eigen::Map<const Vec>(states_.data() + p * state_dim_, state_dim_);
    b.actions.col(k) = Eigen::Map<const Vec>(actions_.data() + p * action_dim_, action_dim_);
    b.next_states.col(k) = Eigen::Map<const Vec>(next_states_.data() + p * state_dim_, state_dim_);
    b.rewards[k] = rewards_[p];
    b.done[k] = done_[p] ? 1.0 : 0.0;
  }
  return b;
}

void ReplayBuffer::dump(nn::Checkpoint& cp, const std::string& prefix) const {
  Vec meta(5);
  meta << static_cast<double>(capacity_), static_cast<double>(size_), static_cast<double>(pushes_), state_dim_,
      action_dim_;
  cp.put(prefix + ".meta", meta);
  std::vector<std::size_t> all(size_);
  for (std::size_t i = 0; i < size_; ++i) all[i] = i;
  if (size_ == 0) return;
  const Batch b = gather(all);
  cp.put(prefix + ".states", b.states);
  cp.put(prefix + ".actions", b.actions);
  cp.put(prefix + ".next_states", b.next_states);
  cp.put(prefix + ".rewards", Vec(b.rewards.transpose()));
  cp.put(prefix + ".done", Vec(b.done.transpose()));
}

ReplayBuffer ReplayBuffer::restore(const nn::Checkpoint& cp, const std::string& prefix) {
  const Vec meta = cp.get_vec(prefix + ".meta");
  require(meta.size() == 5, "malformed replay metadata");
  ReplayBuffer buf(static_cast<std::size_t>(meta[0]));
  const auto size = static_cast<std::size_t>(meta[1]);
  if (size > 0) {
    const Mat s = cp.get_mat(prefix + ".states");
    const Mat a = cp.get_mat(prefix + ".actions");
    const Mat s2 = cp.get_mat(prefix + ".next_states");
    const Vec r = cp.get_vec(prefix + ".rewards");
    const Vec d = cp.get_vec(prefix + ".done");
    for (std::size_t i = 0; i < size; ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      buf.push(Transition{s.col(c), a.col(c), r[c], s2.col(c), d[c] != 0.0});
    }
  }
  buf.pushes_ = static_cast<std::uint64_t>(meta[2]);
  return buf;
}

TabularActionDistribution empirical_action_distribution(const ReplayBuffer& buffer, const StateIndexer& state_index,
                                                        const ActionIndexer& action_index, int n_states,
                                                        int n_actions) {
  require(n_states > 0 && n_actions > 0, "tabular dimensions must be positive");
  Mat counts = Mat::Zero(n_states, n_actions);
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const Transition t = buffer.at(i);
    const int s = state_index(t.state);
    const int a = action_index(t.action);
    require(s >= 0 && s < n_states, "state indexer returned an out-of-range index");
    require(a >= 0 && a < n_actions, "action indexer returned an out-of-range index");
    counts(s, a) += 1.0;
  }
  TabularActionDistribution q = TabularActionDistribution::uniform(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    const double total = counts.row(s).sum();
    if (total > 0.0) q.probs.row(s) = counts.row(s) / total;
  }
  return q;
}

}  // namespace dac
