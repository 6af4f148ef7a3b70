#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lser/rng.hpp"

namespace lser {

// A fixed set of random hyperplanes, one per hash bit. Immutable after
// construction; encode() is pure, so one set can be shared by any number of
// concurrent readers.
struct HyperplaneSet {
  Eigen::MatrixXd normals;  // n_h x d_s, one hyperplane normal per row
  std::uint64_t seed = 0;

  int bits() const { return static_cast<int>(normals.rows()); }
  int dim() const { return static_cast<int>(normals.cols()); }
};

// Draws n_h hyperplane normals from the standard normal distribution.
// The same seed reproduces the matrix bit-exactly.
inline HyperplaneSet make_hyperplanes(int n_h, int d_s, std::uint64_t seed) {
  if (n_h < 1 || d_s < 1) {
    throw std::invalid_argument("make_hyperplanes: n_h and d_s must be >= 1");
  }
  Rng rng(derive_seed(seed, 0x68706c6eull));
  HyperplaneSet hp;
  hp.seed = seed;
  hp.normals.resize(n_h, d_s);
  for (int i = 0; i < n_h; ++i) {
    do {
      for (int j = 0; j < d_s; ++j) hp.normals(i, j) = rng.gaussian();
    } while (hp.normals.row(i).isZero());
  }
  return hp;
}

// Sign-random-projection hash. Bit i is '1' iff the state lies strictly on
// the positive side of hyperplane i; a dot product of exactly zero maps to
// '0'. The returned string (hyperplane 0 first) is the canonical serialized
// form and the bucket key used by the replay code.
inline std::string encode(const HyperplaneSet& hp, const Eigen::VectorXd& s) {
  if (s.size() != hp.normals.cols()) {
    throw std::invalid_argument("encode: state dimension mismatch");
  }
  const Eigen::VectorXd dots = hp.normals * s;
  std::string code(static_cast<std::size_t>(hp.bits()), '0');
  for (int i = 0; i < hp.bits(); ++i) {
    if (dots(i) > 0.0) code[static_cast<std::size_t>(i)] = '1';
  }
  return code;
}

// Probability that one random hyperplane assigns u and v the same bit:
// 1 - theta/pi, where theta is the angle between the vectors. Used by the
// test suite as the analytic oracle for per-bit collision frequency.
inline double angular_collision_prob(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("angular_collision_prob: length mismatch");
  }
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    throw std::invalid_argument("angular_collision_prob: zero vector has no angle");
  }
  const double c = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
  return 1.0 - std::acos(c) / std::numbers::pi;
}

// Jaccard similarity over the positions holding '1'. Two all-zero codes are
// identical and score 1.0 so that similarity search stays total.
inline double jaccard(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("jaccard: code length mismatch");
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] == '1';
    const bool y = b[i] == '1';
    inter += static_cast<std::size_t>(x && y);
    uni += static_cast<std::size_t>(x || y);
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// The k occupied codes most similar to `query`, highest Jaccard first.
// Ties break toward the lexicographically smaller bit string, which makes
// the ordering total and platform-independent. Returns all occupied codes
// when fewer than k exist.
inline std::vector<std::string> nearest_codes(const std::string& query,
                                              const std::vector<std::string>& occupied,
                                              std::size_t k) {
  if (occupied.empty()) throw std::runtime_error("nearest_codes: no occupied codes");
  if (k < 1) throw std::invalid_argument("nearest_codes: k must be >= 1");
  std::vector<std::pair<double, const std::string*>> scored;
  scored.reserve(occupied.size());
  for (const auto& code : occupied) scored.emplace_back(jaccard(query, code), &code);
  std::sort(scored.begin(), scored.end(), [](const auto& lhs, const auto& rhs) {
    if (lhs.first != rhs.first) return lhs.first > rhs.first;
    return *lhs.second < *rhs.second;
  });
  scored.resize(std::min(k, scored.size()));
  std::vector<std::string> out;
  out.reserve(scored.size());
  for (const auto& entry : scored) out.push_back(*entry.second);
  return out;
}

}  // namespace lser
