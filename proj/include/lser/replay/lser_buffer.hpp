#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lser/format.hpp"
#include "lser/lsh.hpp"
#include "lser/replay/replay_buffer.hpp"
#include "lser/rng.hpp"

namespace lser {

namespace detail {

using TransitionView = std::vector<const Transition*>;

// k distinct indices in [0, n), uniform over k-subsets, O(k) expected
// (Floyd's algorithm). Returns all of [0, n) when k >= n.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> out;
  if (k >= n) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    return out;
  }
  out.reserve(k);
  std::unordered_set<std::size_t> seen;
  seen.reserve(k * 2);
  for (std::size_t j = n - k; j < n; ++j) {
    const std::size_t t = static_cast<std::size_t>(rng.below(j + 1));
    if (seen.insert(t).second) {
      out.push_back(t);
    } else {
      seen.insert(j);
      out.push_back(j);
    }
  }
  return out;
}

// Last min(b, n) entries of a reward-ascending view: the highest rewards.
inline std::vector<Transition> take_top(const TransitionView& ascending, std::size_t b) {
  const std::size_t n = ascending.size();
  const std::size_t k = std::min(b, n);
  std::vector<Transition> out;
  out.reserve(k);
  for (std::size_t i = n - k; i < n; ++i) out.push_back(*ascending[i]);
  return out;
}

inline std::vector<Transition> take_uniform(const TransitionView& pool, std::size_t b, Rng& rng) {
  const auto idx = sample_indices(pool.size(), b, rng);
  std::vector<Transition> out;
  out.reserve(idx.size());
  for (const std::size_t i : idx) out.push_back(*pool[i]);
  return out;
}

// Top-b of each bucket merged, then cut back to the b highest rewards so the
// caller always receives a consistent batch size. Stable sort keeps the
// first-bucket-first order among equal rewards.
inline std::vector<Transition> merge_top(const TransitionView& first,
                                         const TransitionView& second, std::size_t b) {
  std::vector<Transition> merged = take_top(first, b);
  for (auto& t : take_top(second, b)) merged.push_back(std::move(t));
  std::stable_sort(merged.begin(), merged.end(),
                   [](const Transition& x, const Transition& y) { return x.reward > y.reward; });
  if (merged.size() > b) merged.resize(b);
  return merged;
}

// Reward-ascending ordered insert. Inserting after equal rewards keeps older
// entries first, so entry 0 is always the oldest among the minimum-reward
// ties and eviction replaces it deterministically.
inline void insert_by_reward(std::vector<Transition>& bucket, const Transition& t) {
  const auto pos = std::upper_bound(
      bucket.begin(), bucket.end(), t.reward,
      [](double r, const Transition& x) { return r < x.reward; });
  bucket.insert(pos, t);
}

}  // namespace detail

// Locality-sensitive replay buffer: transitions are bucketed by the hash
// code of their state, each bucket is kept reward-ascending, eviction
// replaces a bucket's minimum-reward entry, and sampling is epsilon-greedy
// over the bucket matching the query state with a Jaccard nearest-bucket
// fallback when that bucket is empty.
class LserBuffer : public ReplayBuffer {
 public:
  LserBuffer(std::size_t capacity, HyperplaneSet planes, double eps_max, std::uint64_t rng_seed)
      : planes_(std::move(planes)),
        capacity_(capacity),
        eps_max_(eps_max),
        rng_(rng_seed) {
    if (capacity_ < 1) throw std::invalid_argument("LserBuffer: capacity must be >= 1");
    if (eps_max_ < 0.0 || eps_max_ > 1.0) {
      throw std::invalid_argument("LserBuffer: eps_max must lie in [0, 1]");
    }
  }

  // Stores the transition under the hash code of its state. On a full
  // buffer the transition only displaces the minimum-reward entry of its own
  // bucket, and only when it improves on that minimum; otherwise it is
  // dropped and push returns false.
  bool push(const Transition& t) override {
    const std::string code = encode(planes_, t.state);
    if (size_ < capacity_) {
      detail::insert_by_reward(table_[code], t);
      ++size_;
      return true;
    }
    const auto it = table_.find(code);
    if (it == table_.end()) return false;
    std::vector<Transition>& bucket = it->second;
    if (!(t.reward > bucket.front().reward)) return false;
    bucket.erase(bucket.begin());
    detail::insert_by_reward(bucket, t);
    return true;
  }

  SampleBatch sample(const Eigen::VectorXd& query_state, std::size_t batch) override {
    SampleBatch out;
    out.items = sample_by_code(encode(planes_, query_state), batch);
    return out;
  }

  // Sampling core, addressable by hash code directly so every code in
  // {0,1}^n_h can be exercised. With probability eps_max the batch is the
  // top-b rewards of the matching bucket, otherwise a uniform draw from it.
  // When the bucket is absent the two most similar occupied buckets stand in.
  std::vector<Transition> sample_by_code(const std::string& code, std::size_t b) {
    if (b < 1) throw std::invalid_argument("sample: batch size must be >= 1");
    if (size_ == 0) throw std::runtime_error("sample: buffer is empty");
    ++counters_.sample_calls;
    const bool greedy = rng_.uniform() < eps_max_;
    if (greedy) {
      ++counters_.greedy_batches;
    } else {
      ++counters_.random_batches;
    }

    const auto it = table_.find(code);
    if (it != table_.end()) {
      const detail::TransitionView view = make_view(it->second);
      return greedy ? detail::take_top(view, b) : detail::take_uniform(view, b, rng_);
    }

    ++counters_.fallback_lookups;
    ++counters_.nearest_code_calls;
    const auto nearest = nearest_codes(code, occupied_codes(), 2);
    const detail::TransitionView first = make_view(table_.at(nearest[0]));
    const detail::TransitionView second =
        nearest.size() > 1 ? make_view(table_.at(nearest[1])) : detail::TransitionView{};
    if (greedy) return detail::merge_top(first, second, b);
    detail::TransitionView pool = first;
    pool.insert(pool.end(), second.begin(), second.end());
    return detail::take_uniform(pool, b, rng_);
  }

  // Uniform draw over every stored transition, ignoring bucket structure.
  // This is the replaced-sampling ablation path; it never touches the
  // Jaccard fallback.
  std::vector<Transition> sample_global_uniform(std::size_t b) {
    if (b < 1) throw std::invalid_argument("sample: batch size must be >= 1");
    if (size_ == 0) throw std::runtime_error("sample: buffer is empty");
    ++counters_.sample_calls;
    ++counters_.random_batches;
    refresh_flat_index();
    std::vector<std::size_t> cum(flat_index_.size());
    std::size_t running = 0;
    for (std::size_t i = 0; i < flat_index_.size(); ++i) {
      running += flat_index_[i]->size();
      cum[i] = running;
    }
    const auto ranks = detail::sample_indices(size_, b, rng_);
    std::vector<Transition> out;
    out.reserve(ranks.size());
    for (const std::size_t rank : ranks) {
      const auto it = std::upper_bound(cum.begin(), cum.end(), rank);
      const std::size_t bucket_idx = static_cast<std::size_t>(it - cum.begin());
      const std::size_t before = bucket_idx == 0 ? 0 : cum[bucket_idx - 1];
      out.push_back((*flat_index_[bucket_idx])[rank - before]);
    }
    return out;
  }

  std::size_t size() const override { return size_; }
  std::size_t capacity() const override { return capacity_; }

  BufferStats stats() const override {
    BufferStats s;
    s.size = size_;
    s.bucket_count = table_.size();
    for (const auto& [code, bucket] : table_) {
      const double lo = bucket.front().reward;
      const double hi = bucket.back().reward;
      if (!s.min_reward || lo < *s.min_reward) s.min_reward = lo;
      if (!s.max_reward || hi > *s.max_reward) s.max_reward = hi;
    }
    return s;
  }

  const SampleCounters* sample_counters() const override { return &counters_; }

  std::vector<std::string> occupied_codes() const {
    std::vector<std::string> codes;
    codes.reserve(table_.size());
    for (const auto& [code, bucket] : table_) codes.push_back(code);
    return codes;
  }

  const std::vector<Transition>* bucket(const std::string& code) const {
    const auto it = table_.find(code);
    return it == table_.end() ? nullptr : &it->second;
  }

  const HyperplaneSet& hyperplanes() const { return planes_; }
  double eps_max() const { return eps_max_; }

  // One CSV line per stored transition, bucket keys in sorted order.
  void dump_csv(std::ostream& os) const {
    os << "bucket_key,reward,m_t,episode_id\n";
    std::map<std::string, const std::vector<Transition>*> ordered;
    for (const auto& [code, bucket] : table_) ordered.emplace(code, &bucket);
    for (const auto& [code, bucket] : ordered) {
      for (const Transition& t : *bucket) {
        os << code << ',' << fmt_double(t.reward) << ',' << (t.terminal ? 1 : 0) << ','
           << t.episode << '\n';
      }
    }
  }

 private:
  static detail::TransitionView make_view(const std::vector<Transition>& bucket) {
    detail::TransitionView view;
    view.reserve(bucket.size());
    for (const Transition& t : bucket) view.push_back(&t);
    return view;
  }

  // Bucket pointers in insertion-stable order for global-uniform sampling.
  // New codes only ever get appended, and LserBuffer never erases a bucket,
  // so the cache is rebuilt only when a bucket is created.
  void refresh_flat_index() {
    if (flat_index_.size() == table_.size()) return;
    for (const auto& [code, bucket] : table_) {
      if (!flat_ids_.contains(code)) {
        flat_ids_.insert(code);
        flat_order_.push_back(code);
      }
    }
    flat_index_.clear();
    flat_index_.reserve(flat_order_.size());
    for (const auto& code : flat_order_) flat_index_.push_back(&table_.at(code));
  }

  std::unordered_map<std::string, std::vector<Transition>> table_;
  HyperplaneSet planes_;
  std::size_t capacity_ = 0;
  std::size_t size_ = 0;
  double eps_max_ = 0.99;
  Rng rng_;
  SampleCounters counters_;
  std::unordered_set<std::string> flat_ids_;
  std::vector<std::string> flat_order_;
  std::vector<const std::vector<Transition>*> flat_index_;
};

}  // namespace lser
