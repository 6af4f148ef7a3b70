#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lser/lsh.hpp"
#include "lser/replay/lser_buffer.hpp"
#include "lser/replay/replay_buffer.hpp"
#include "lser/rng.hpp"

namespace lser {

// Replaced-store ablation: plain FIFO ring eviction (oldest transition goes
// first, regardless of reward), but sampling still runs over hash buckets
// with the epsilon-greedy rule and Jaccard fallback.
class FifoBucketBuffer : public ReplayBuffer {
 public:
  FifoBucketBuffer(std::size_t capacity, HyperplaneSet planes, double eps_max,
                   std::uint64_t rng_seed)
      : planes_(std::move(planes)), capacity_(capacity), eps_max_(eps_max), rng_(rng_seed) {
    if (capacity_ < 1) throw std::invalid_argument("FifoBucketBuffer: capacity must be >= 1");
    if (eps_max_ < 0.0 || eps_max_ > 1.0) {
      throw std::invalid_argument("FifoBucketBuffer: eps_max must lie in [0, 1]");
    }
    ring_.reserve(capacity_);
  }

  bool push(const Transition& t) override {
    const std::string code = encode(planes_, t.state);
    std::size_t slot;
    if (ring_.size() < capacity_) {
      slot = ring_.size();
      ring_.push_back(Slot{t, code});
    } else {
      slot = write_head_;
      detach_slot(slot);
      ring_[slot] = Slot{t, code};
      write_head_ = (write_head_ + 1) % capacity_;
    }
    attach_slot(slot);
    return true;
  }

  SampleBatch sample(const Eigen::VectorXd& query_state, std::size_t batch) override {
    SampleBatch out;
    out.items = sample_by_code(encode(planes_, query_state), batch);
    return out;
  }

  std::vector<Transition> sample_by_code(const std::string& code, std::size_t b) {
    if (b < 1) throw std::invalid_argument("sample: batch size must be >= 1");
    if (ring_.empty()) throw std::runtime_error("sample: buffer is empty");
    ++counters_.sample_calls;
    const bool greedy = rng_.uniform() < eps_max_;
    if (greedy) {
      ++counters_.greedy_batches;
    } else {
      ++counters_.random_batches;
    }

    const auto it = buckets_.find(code);
    if (it != buckets_.end()) {
      const auto view = make_view(it->second);
      return greedy ? detail::take_top(view, b) : detail::take_uniform(view, b, rng_);
    }

    ++counters_.fallback_lookups;
    ++counters_.nearest_code_calls;
    const auto nearest = nearest_codes(code, occupied_codes(), 2);
    const auto first = make_view(buckets_.at(nearest[0]));
    const auto second =
        nearest.size() > 1 ? make_view(buckets_.at(nearest[1])) : detail::TransitionView{};
    if (greedy) return detail::merge_top(first, second, b);
    detail::TransitionView pool = first;
    pool.insert(pool.end(), second.begin(), second.end());
    return detail::take_uniform(pool, b, rng_);
  }

  std::size_t size() const override { return ring_.size(); }
  std::size_t capacity() const override { return capacity_; }

  BufferStats stats() const override {
    BufferStats s;
    s.size = ring_.size();
    s.bucket_count = buckets_.size();
    for (const Slot& slot : ring_) {
      if (!s.min_reward || slot.t.reward < *s.min_reward) s.min_reward = slot.t.reward;
      if (!s.max_reward || slot.t.reward > *s.max_reward) s.max_reward = slot.t.reward;
    }
    return s;
  }

  const SampleCounters* sample_counters() const override { return &counters_; }

  std::vector<std::string> occupied_codes() const {
    std::vector<std::string> codes;
    codes.reserve(buckets_.size());
    for (const auto& [code, slots] : buckets_) codes.push_back(code);
    return codes;
  }

 private:
  struct Slot {
    Transition t;
    std::string code;
  };

  // Slot ids sorted reward-ascending; ties keep insertion order so the view
  // matches the reward-store buffer's ordering semantics.
  void attach_slot(std::size_t slot) {
    auto& ids = buckets_[ring_[slot].code];
    const double r = ring_[slot].t.reward;
    const auto pos = std::upper_bound(ids.begin(), ids.end(), r,
                                      [this](double lhs, std::size_t id) {
                                        return lhs < ring_[id].t.reward;
                                      });
    ids.insert(pos, slot);
  }

  void detach_slot(std::size_t slot) {
    const auto it = buckets_.find(ring_[slot].code);
    auto& ids = it->second;
    ids.erase(std::find(ids.begin(), ids.end(), slot));
    if (ids.empty()) buckets_.erase(it);
  }

  detail::TransitionView make_view(const std::vector<std::size_t>& ids) const {
    detail::TransitionView view;
    view.reserve(ids.size());
    for (const std::size_t id : ids) view.push_back(&ring_[id].t);
    return view;
  }

  std::vector<Slot> ring_;
  std::unordered_map<std::string, std::vector<std::size_t>> buckets_;
  HyperplaneSet planes_;
  std::size_t capacity_ = 0;
  std::size_t write_head_ = 0;
  double eps_max_ = 0.99;
  Rng rng_;
  SampleCounters counters_;
};

// Replaced-sampling ablation: storage identical to LserBuffer (bucketed,
// min-reward eviction) but batches are drawn uniformly from the whole
// buffer. Never performs a nearest-code lookup.
class BucketStoreUniformSampleBuffer : public ReplayBuffer {
 public:
  BucketStoreUniformSampleBuffer(std::size_t capacity, HyperplaneSet planes,
                                 std::uint64_t rng_seed)
      : core_(capacity, std::move(planes), /*eps_max=*/0.0, rng_seed) {}

  bool push(const Transition& t) override { return core_.push(t); }

  SampleBatch sample(const Eigen::VectorXd& /*query_state*/, std::size_t batch) override {
    SampleBatch out;
    out.items = core_.sample_global_uniform(batch);
    return out;
  }

  std::size_t size() const override { return core_.size(); }
  std::size_t capacity() const override { return core_.capacity(); }
  BufferStats stats() const override { return core_.stats(); }
  const SampleCounters* sample_counters() const override { return core_.sample_counters(); }

 private:
  LserBuffer core_;
};

}  // namespace lser
