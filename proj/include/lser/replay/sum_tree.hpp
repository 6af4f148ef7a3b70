#pragma once

#include <bit>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace lser {

// Binary indexed tree over leaf masses supporting O(log n) point updates and
// prefix-mass descent. The internal width is the next power of two so that
// leaves sit in index order on one level and descent visits them in exactly
// the order a linear cumulative scan would. Padding leaves hold zero mass
// and can never be selected while the queried value stays below the total.
// Internal nodes are recomputed from their children on every update, so the
// root never drifts away from the true leaf sum.
class SumTree {
 public:
  explicit SumTree(std::size_t leaves)
      : leaves_(leaves), width_(std::bit_ceil(leaves)), nodes_(2 * std::bit_ceil(leaves), 0.0) {
    if (leaves_ < 1) throw std::invalid_argument("SumTree: need at least one leaf");
  }

  std::size_t leaf_count() const { return leaves_; }
  double total() const { return nodes_[1]; }

  double leaf(std::size_t i) const {
    check_leaf(i);
    return nodes_[width_ + i];
  }

  void update(std::size_t i, double mass) {
    check_leaf(i);
    if (mass < 0.0) throw std::invalid_argument("SumTree: negative mass");
    std::size_t p = width_ + i;
    nodes_[p] = mass;
    for (p /= 2; p >= 1; p /= 2) nodes_[p] = nodes_[2 * p] + nodes_[2 * p + 1];
  }

  // Leaf index whose cumulative mass interval contains `value`; equivalent
  // to a linear scan over cumulative leaf masses.
  std::size_t find_prefix(double value) const {
    if (total() <= 0.0) throw std::runtime_error("SumTree: empty tree");
    if (value < 0.0) value = 0.0;
    std::size_t p = 1;
    while (p < width_) {
      const std::size_t left = 2 * p;
      if (value < nodes_[left]) {
        p = left;
      } else {
        value -= nodes_[left];
        p = left + 1;
      }
    }
    std::size_t i = p - width_;
    if (i >= leaves_) i = leaves_ - 1;  // only reachable when value >= total
    return i;
  }

 private:
  void check_leaf(std::size_t i) const {
    if (i >= leaves_) throw std::out_of_range("SumTree: leaf index out of range");
  }

  std::size_t leaves_;
  std::size_t width_;
  std::vector<double> nodes_;  // 1-indexed heap layout, leaves at [width_, width_ + leaves_)
};

}  // namespace lser
