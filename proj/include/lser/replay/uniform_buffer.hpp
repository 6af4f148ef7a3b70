#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "lser/replay/lser_buffer.hpp"
#include "lser/replay/replay_buffer.hpp"
#include "lser/rng.hpp"

namespace lser {

// Vanilla experience replay: FIFO ring storage, uniform sampling without
// replacement. The query state is ignored.
class UniformBuffer : public ReplayBuffer {
 public:
  UniformBuffer(std::size_t capacity, std::uint64_t rng_seed)
      : capacity_(capacity), rng_(rng_seed) {
    if (capacity_ < 1) throw std::invalid_argument("UniformBuffer: capacity must be >= 1");
    entries_.reserve(capacity_);
  }

  bool push(const Transition& t) override {
    if (entries_.size() < capacity_) {
      entries_.push_back(t);
    } else {
      entries_[write_head_] = t;
      write_head_ = (write_head_ + 1) % capacity_;
    }
    return true;
  }

  SampleBatch sample(const Eigen::VectorXd& /*query_state*/, std::size_t batch) override {
    if (batch < 1) throw std::invalid_argument("sample: batch size must be >= 1");
    if (entries_.empty()) throw std::runtime_error("sample: buffer is empty");
    SampleBatch out;
    const auto idx = detail::sample_indices(entries_.size(), batch, rng_);
    out.items.reserve(idx.size());
    for (const std::size_t i : idx) out.items.push_back(entries_[i]);
    return out;
  }

  std::size_t size() const override { return entries_.size(); }
  std::size_t capacity() const override { return capacity_; }
  std::size_t write_head() const { return write_head_; }

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

  const std::vector<Transition>& entries() const { return entries_; }

 private:
  std::vector<Transition> entries_;
  std::size_t capacity_ = 0;
  std::size_t write_head_ = 0;
  Rng rng_;
};

}  // namespace lser
