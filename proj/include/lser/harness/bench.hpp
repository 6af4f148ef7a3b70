#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lser/lsh.hpp"
#include "lser/replay/lser_buffer.hpp"
#include "lser/replay/per_buffer.hpp"
#include "lser/replay/uniform_buffer.hpp"
#include "lser/rng.hpp"

namespace lser {

struct BenchRow {
  std::string structure;
  std::size_t total_size = 0;
  std::string op;  // "push" or "sample"
  double median_ns = 0.0;
  std::size_t ops = 0;
};

struct BenchOptions {
  std::vector<std::size_t> sizes{10000, 31623, 100000};
  std::size_t bucket_size = 32;  // cluster size for the locality buffer
  std::size_t batch = 64;
  std::size_t ops = 10000;  // timed operations per point
  int hash_bits = 16;
  int state_dim = 9;
  int action_dim = 8;
  std::uint64_t seed = 42;
};

namespace bench_detail {

// Per-op cost measured in chunks so the clock read amortizes the same way
// at every size; the reported value is the median across chunks.
class ChunkTimer {
 public:
  explicit ChunkTimer(std::size_t chunk) : chunk_(chunk) {}

  template <class F>
  double run(std::size_t total_ops, F&& op) {
    std::vector<double> per_op;
    per_op.reserve(total_ops / chunk_ + 1);
    std::size_t done = 0;
    while (done < total_ops) {
      const std::size_t n = std::min(chunk_, total_ops - done);
      const auto t0 = std::chrono::steady_clock::now();
      for (std::size_t i = 0; i < n; ++i) op();
      const auto t1 = std::chrono::steady_clock::now();
      per_op.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count() /
                       static_cast<double>(n));
      done += n;
    }
    std::sort(per_op.begin(), per_op.end());
    return per_op[per_op.size() / 2];
  }

 private:
  std::size_t chunk_;
};

// States drawn from tight clusters on the unit sphere: every cluster hashes
// to one code with overwhelming probability, so bucket sizes stay near the
// requested value while the bucket count scales with the total size.
inline Eigen::VectorXd cluster_state(const Eigen::VectorXd& center, Rng& rng) {
  Eigen::VectorXd s = center;
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) += 1e-3 * rng.gaussian();
  s.normalize();
  return s;
}

inline Transition make_transition(const Eigen::VectorXd& state, int action_dim, Rng& rng) {
  Transition t;
  t.state = state;
  t.action = Eigen::VectorXd::Zero(action_dim);
  t.next_state = state;
  t.reward = rng.uniform();
  return t;
}

}  // namespace bench_detail

inline std::vector<BenchRow> bench_buffers(const BenchOptions& opt) {
  if (opt.sizes.empty()) throw std::invalid_argument("bench: sizes must be non-empty");
  for (std::size_t i = 1; i < opt.sizes.size(); ++i) {
    if (opt.sizes[i] <= opt.sizes[i - 1]) {
      throw std::invalid_argument("bench: sizes must be ascending");
    }
  }
  std::vector<BenchRow> rows;
  bench_detail::ChunkTimer timer(16);

  for (const std::size_t total : opt.sizes) {
    Rng rng(derive_seed(opt.seed, total));

    // --- locality-sensitive buffer, fixed bucket profile ---
    {
      const std::size_t clusters = std::max<std::size_t>(1, total / opt.bucket_size);
      std::vector<Eigen::VectorXd> centers;
      centers.reserve(clusters);
      for (std::size_t c = 0; c < clusters; ++c) {
        Eigen::VectorXd center(opt.state_dim);
        for (int i = 0; i < opt.state_dim; ++i) center(i) = rng.gaussian();
        center.normalize();
        centers.push_back(std::move(center));
      }
      LserBuffer buf(total,
                     make_hyperplanes(opt.hash_bits, opt.state_dim, derive_seed(opt.seed, 0xb1)),
                     /*eps_max=*/1.0, derive_seed(opt.seed, 0xb2));
      std::vector<Eigen::VectorXd> stored_states;
      stored_states.reserve(total);
      for (std::size_t i = 0; i < total; ++i) {
        const Eigen::VectorXd s = bench_detail::cluster_state(centers[i % clusters], rng);
        buf.push(bench_detail::make_transition(s, opt.action_dim, rng));
        stored_states.push_back(s);
      }

      std::size_t qi = 0;
      const double sample_ns = timer.run(opt.ops, [&] {
        buf.sample(stored_states[qi], opt.batch);
        qi = (qi + 1) % stored_states.size();
      });
      rows.push_back(BenchRow{"lser", total, "sample", sample_ns, opt.ops});

      std::size_t pi = 0;
      const double push_ns = timer.run(opt.ops, [&] {
        const Eigen::VectorXd s = bench_detail::cluster_state(centers[pi % clusters], rng);
        buf.push(bench_detail::make_transition(s, opt.action_dim, rng));
        ++pi;
      });
      rows.push_back(BenchRow{"lser", total, "push", push_ns, opt.ops});
    }

    // --- uniform ring ---
    {
      UniformBuffer buf(total, derive_seed(opt.seed, 0xb3));
      Eigen::VectorXd dummy = Eigen::VectorXd::Zero(opt.state_dim);
      for (std::size_t i = 0; i < total; ++i) {
        Eigen::VectorXd s(opt.state_dim);
        for (int j = 0; j < opt.state_dim; ++j) s(j) = rng.gaussian();
        buf.push(bench_detail::make_transition(s, opt.action_dim, rng));
      }
      const double sample_ns =
          timer.run(opt.ops, [&] { buf.sample(dummy, opt.batch); });
      rows.push_back(BenchRow{"uniform", total, "sample", sample_ns, opt.ops});
      Eigen::VectorXd s = Eigen::VectorXd::Zero(opt.state_dim);
      const double push_ns = timer.run(opt.ops, [&] {
        buf.push(bench_detail::make_transition(s, opt.action_dim, rng));
      });
      rows.push_back(BenchRow{"uniform", total, "push", push_ns, opt.ops});
    }

    // --- prioritized buffer ---
    {
      PerBuffer buf(total, 0.6, 0.4, 0.01, derive_seed(opt.seed, 0xb4));
      Eigen::VectorXd dummy = Eigen::VectorXd::Zero(opt.state_dim);
      std::vector<std::size_t> idx(1);
      std::vector<double> td(1);
      for (std::size_t i = 0; i < total; ++i) {
        Eigen::VectorXd s(opt.state_dim);
        for (int j = 0; j < opt.state_dim; ++j) s(j) = rng.gaussian();
        buf.push(bench_detail::make_transition(s, opt.action_dim, rng));
        // spread the priorities so the tree is non-degenerate
        idx[0] = i;
        td[0] = rng.uniform();
        buf.update_priorities(idx, td);
      }
      const double sample_ns =
          timer.run(opt.ops, [&] { buf.sample(dummy, opt.batch); });
      rows.push_back(BenchRow{"per", total, "sample", sample_ns, opt.ops});
      Eigen::VectorXd s = Eigen::VectorXd::Zero(opt.state_dim);
      const double push_ns = timer.run(opt.ops, [&] {
        buf.push(bench_detail::make_transition(s, opt.action_dim, rng));
      });
      rows.push_back(BenchRow{"per", total, "push", push_ns, opt.ops});
    }
  }
  return rows;
}

// Least-squares slope of log(latency) against log(size) for one
// structure/op series; near 0 for flat cost, near 1 for linear growth.
inline double log_log_slope(const std::vector<BenchRow>& rows, const std::string& structure,
                            const std::string& op) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const BenchRow& r : rows) {
    if (r.structure == structure && r.op == op) {
      xs.push_back(std::log(static_cast<double>(r.total_size)));
      ys.push_back(std::log(r.median_ns));
    }
  }
  if (xs.size() < 2) throw std::invalid_argument("log_log_slope: need >= 2 points");
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace lser
