#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <vector>

#include "lser/replay/replay_buffer.hpp"
#include "lser/replay/sum_tree.hpp"
#include "lser/rng.hpp"

namespace lser {

// Proportional prioritized replay: FIFO ring storage with a sum tree over
// priorities p_i, stratified sampling across b equal-mass segments, and
// importance-sampling weights w_i = (n * P(i))^-beta normalized to max 1.
// New transitions enter at the maximum live priority (1.0 when empty) so
// they are replayed soon; updates set p_i = (|td| + eps)^alpha.
class PerBuffer : public ReplayBuffer {
 public:
  PerBuffer(std::size_t capacity, double alpha, double beta, double eps_priority,
            std::uint64_t rng_seed)
      : capacity_(capacity),
        alpha_(alpha),
        beta_(beta),
        eps_priority_(eps_priority),
        tree_(std::max<std::size_t>(capacity, 1)),
        rng_(rng_seed) {
    if (capacity_ < 1) throw std::invalid_argument("PerBuffer: capacity must be >= 1");
    if (eps_priority_ <= 0.0) throw std::invalid_argument("PerBuffer: eps_priority must be > 0");
    entries_.reserve(capacity_);
  }

  bool push(const Transition& t) override {
    const double priority = live_priorities_.empty() ? 1.0 : *live_priorities_.rbegin();
    std::size_t slot;
    if (entries_.size() < capacity_) {
      slot = entries_.size();
      entries_.push_back(t);
    } else {
      slot = write_head_;
      live_priorities_.erase(live_priorities_.find(tree_.leaf(slot)));
      entries_[slot] = t;
      write_head_ = (write_head_ + 1) % capacity_;
    }
    tree_.update(slot, priority);
    live_priorities_.insert(priority);
    return true;
  }

  SampleBatch sample(const Eigen::VectorXd& /*query_state*/, std::size_t batch) override {
    if (batch < 1) throw std::invalid_argument("sample: batch size must be >= 1");
    if (entries_.empty()) throw std::runtime_error("sample: buffer is empty");
    SampleBatch out;
    out.items.reserve(batch);
    out.indices.reserve(batch);
    out.weights.reserve(batch);
    const double total = tree_.total();
    const double n = static_cast<double>(entries_.size());
    double max_weight = 0.0;
    for (std::size_t seg = 0; seg < batch; ++seg) {
      const double lo = total * static_cast<double>(seg) / static_cast<double>(batch);
      const double hi = total * static_cast<double>(seg + 1) / static_cast<double>(batch);
      const double u = lo + rng_.uniform() * (hi - lo);
      std::size_t leaf = tree_.find_prefix(u);
      if (leaf >= entries_.size()) leaf = entries_.size() - 1;
      const double prob = tree_.leaf(leaf) / total;
      const double weight = std::pow(n * prob, -beta_);
      out.items.push_back(entries_[leaf]);
      out.indices.push_back(leaf);
      out.weights.push_back(weight);
      max_weight = std::max(max_weight, weight);
    }
    if (max_weight > 0.0) {
      for (double& w : out.weights) w /= max_weight;
    }
    return out;
  }

  void update_priorities(const std::vector<std::size_t>& indices,
                         const std::vector<double>& td_errors) override {
    if (indices.size() != td_errors.size()) {
      throw std::invalid_argument("update_priorities: size mismatch");
    }
    for (std::size_t k = 0; k < indices.size(); ++k) {
      const std::size_t i = indices[k];
      if (i >= entries_.size()) throw std::out_of_range("update_priorities: stale index");
      const double p = std::pow(std::abs(td_errors[k]) + eps_priority_, alpha_);
      live_priorities_.erase(live_priorities_.find(tree_.leaf(i)));
      tree_.update(i, p);
      live_priorities_.insert(p);
    }
  }

  std::size_t size() const override { return entries_.size(); }
  std::size_t capacity() const override { return capacity_; }

  BufferStats stats() const override {
    BufferStats s;
    s.size = entries_.size();
    s.bucket_count = entries_.empty() ? 0 : 1;
    for (const Transition& t : entries_) {
      if (!s.min_reward || t.reward < *s.min_reward) s.min_reward = t.reward;
      if (!s.max_reward || t.reward > *s.max_reward) s.max_reward = t.reward;
    }
    return s;
  }

  const SumTree& tree() const { return tree_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double priority_of(std::size_t i) const { return tree_.leaf(i); }

 private:
  std::vector<Transition> entries_;
  std::size_t capacity_ = 0;
  std::size_t write_head_ = 0;
  double alpha_ = 0.6;
  double beta_ = 0.4;
  double eps_priority_ = 0.01;
  SumTree tree_;
  std::multiset<double> live_priorities_;
  Rng rng_;
};

}  // namespace lser
