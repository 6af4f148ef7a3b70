#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "lser/transition.hpp"

namespace lser {

// Result of one sample() call. `indices` and `weights` are only populated by
// prioritized buffers; an empty weights vector means every weight is 1.
struct SampleBatch {
  std::vector<Transition> items;
  std::vector<std::size_t> indices;
  std::vector<double> weights;
};

struct BufferStats {
  std::size_t size = 0;
  std::size_t bucket_count = 0;
  std::optional<double> min_reward;
  std::optional<double> max_reward;
};

// Branch counters kept by the locality-sensitive buffers; used by the sweep
// harness and by tests that assert which sampling path ran.
struct SampleCounters {
  std::uint64_t sample_calls = 0;
  std::uint64_t greedy_batches = 0;
  std::uint64_t random_batches = 0;
  std::uint64_t fallback_lookups = 0;
  std::uint64_t nearest_code_calls = 0;
};

// Common contract for every replay structure in this library. sample() takes
// the querying state; buffers without state-aware sampling ignore it.
// Buffers are single-writer: push/sample must be externally serialized.
class ReplayBuffer {
 public:
  virtual ~ReplayBuffer() = default;

  // Returns true when the transition was stored (possibly evicting another).
  virtual bool push(const Transition& t) = 0;

  virtual SampleBatch sample(const Eigen::VectorXd& query_state, std::size_t batch) = 0;

  // Priority feedback after an update; only meaningful for prioritized
  // buffers, a no-op elsewhere.
  virtual void update_priorities(const std::vector<std::size_t>& /*indices*/,
                                 const std::vector<double>& /*td_errors*/) {}

  virtual std::size_t size() const = 0;
  virtual std::size_t capacity() const = 0;
  virtual BufferStats stats() const = 0;

  virtual const SampleCounters* sample_counters() const { return nullptr; }
};

}  // namespace lser
