#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "lser/harness/stats.hpp"
#include "lser/replay/per_buffer.hpp"
#include "lser/replay/sum_tree.hpp"
#include "lser/replay/uniform_buffer.hpp"
#include "lser/rng.hpp"

using lser::PerBuffer;
using lser::Rng;
using lser::SumTree;
using lser::Transition;
using lser::UniformBuffer;

namespace {

Transition with_reward(double reward, std::int64_t episode = 0) {
  Transition t;
  t.state = Eigen::Vector2d(reward, 0.0);
  t.action = Eigen::VectorXd::Zero(1);
  t.next_state = t.state;
  t.reward = reward;
  t.episode = episode;
  return t;
}

const Eigen::VectorXd kQuery = Eigen::Vector2d(0.0, 0.0);

}  // namespace

TEST_CASE("uniform buffer overwrites oldest-first", "[baselines]") {
  UniformBuffer buf(2, 3);
  buf.push(with_reward(1.0));
  buf.push(with_reward(2.0));
  buf.push(with_reward(3.0));
  std::multiset<double> rewards;
  for (const auto& t : buf.entries()) rewards.insert(t.reward);
  REQUIRE(rewards == std::multiset<double>{2.0, 3.0});

  UniformBuffer small(3, 3);
  small.push(with_reward(1.0));
  small.push(with_reward(2.0));
  REQUIRE(small.size() == 2);

  UniformBuffer ring(3, 3);
  for (int i = 0; i < 9; ++i) {
    REQUIRE(ring.write_head() == static_cast<std::size_t>(i < 3 ? 0 : (i - 3) % 3));
    ring.push(with_reward(i));
  }
  REQUIRE(ring.size() == 3);
}

TEST_CASE("uniform sampling is unbiased and total below b", "[baselines]") {
  UniformBuffer buf(16, 12);
  for (int i = 0; i < 10; ++i) buf.push(with_reward(0.1 * i, i));

  std::map<std::int64_t, int> counts;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const auto got = buf.sample(kQuery, 1);
    counts[got.items[0].episode]++;
  }
  for (const auto& [episode, count] : counts) {
    REQUIRE(std::abs(static_cast<double>(count) / trials - 0.1) <= 0.02);
  }

  UniformBuffer tiny(8, 12);
  for (int i = 0; i < 3; ++i) tiny.push(with_reward(i));
  REQUIRE(tiny.sample(kQuery, 5).items.size() == 3);

  UniformBuffer empty(8, 12);
  REQUIRE_THROWS_AS(empty.sample(kQuery, 1), std::runtime_error);
}

TEST_CASE("sum tree root always equals the naive leaf sum", "[baselines]") {
  Rng rng(55);
  for (const std::size_t leaves : {1ul, 2ul, 7ul, 64ul}) {
    SumTree tree(leaves);
    std::vector<double> naive(leaves, 0.0);
    for (int step = 0; step < 1000; ++step) {
      const std::size_t i = rng.below(leaves);
      const double mass = rng.uniform() * 10.0;
      tree.update(i, mass);
      naive[i] = mass;
      double total = 0.0;
      for (const double m : naive) total += m;
      if (total > 0.0) {
        REQUIRE(std::abs(tree.total() - total) <= 1e-9 * total);
      }
    }
  }
}

TEST_CASE("prefix descent matches a linear cumulative scan", "[baselines]") {
  Rng rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t leaves = 1 + rng.below(64);
    SumTree tree(leaves);
    std::vector<double> mass(leaves);
    for (std::size_t i = 0; i < leaves; ++i) {
      mass[i] = rng.uniform() < 0.2 ? 0.0 : rng.uniform() * 5.0;
      tree.update(i, mass[i]);
    }
    if (tree.total() <= 0.0) continue;
    const double v = rng.uniform() * tree.total();
    const std::size_t got = tree.find_prefix(v);
    // linear oracle
    double acc = 0.0;
    std::size_t expect = leaves - 1;
    for (std::size_t i = 0; i < leaves; ++i) {
      acc += mass[i];
      if (v < acc) {
        expect = i;
        break;
      }
    }
    REQUIRE(got == expect);
  }
  SumTree empty(4);
  REQUIRE_THROWS_AS(empty.find_prefix(0.0), std::runtime_error);
  REQUIRE_THROWS_AS(empty.update(4, 1.0), std::out_of_range);
}

TEST_CASE("per push assigns the max live priority", "[baselines]") {
  PerBuffer buf(4, 0.6, 0.4, 0.01, 9);
  buf.push(with_reward(0.0, 0));
  REQUIRE(buf.priority_of(0) == 1.0);

  buf.update_priorities({0}, {/*td=*/10.0});
  const double boosted = buf.priority_of(0);
  REQUIRE(boosted == Catch::Approx(std::pow(10.01, 0.6)));
  buf.push(with_reward(0.0, 1));
  REQUIRE(buf.priority_of(1) == boosted);
}

TEST_CASE("priority update follows (|td| + eps)^alpha", "[baselines]") {
  PerBuffer buf(4, 0.6, 0.4, 0.01, 9);
  buf.push(with_reward(0.0));
  buf.update_priorities({0}, {0.0});
  REQUIRE(buf.priority_of(0) == Catch::Approx(0.063095734448).epsilon(1e-9));

  buf.update_priorities({0}, {-2.5});
  const double neg = buf.priority_of(0);
  buf.update_priorities({0}, {2.5});
  REQUIRE(buf.priority_of(0) == neg);

  REQUIRE_THROWS_AS(buf.update_priorities({5}, {1.0}), std::out_of_range);
}

TEST_CASE("per root consistency after many random updates", "[baselines]") {
  PerBuffer buf(64, 0.6, 0.4, 0.01, 31);
  Rng rng(13);
  for (int i = 0; i < 64; ++i) buf.push(with_reward(rng.uniform(), i));
  for (int step = 0; step < 1000; ++step) {
    const std::size_t i = rng.below(64);
    buf.update_priorities({i}, {rng.gaussian()});
  }
  double naive = 0.0;
  for (std::size_t i = 0; i < 64; ++i) naive += buf.priority_of(i);
  REQUIRE(std::abs(buf.tree().total() - naive) <= 1e-9 * naive);
}

TEST_CASE("per with alpha=0 reduces to uniform sampling", "[baselines]") {
  PerBuffer buf(10, /*alpha=*/0.0, /*beta=*/0.4, 0.01, 21);
  Rng rng(3);
  for (int i = 0; i < 10; ++i) buf.push(with_reward(0.1 * i, i));
  // wildly different td magnitudes all collapse to priority 1 at alpha=0
  for (std::size_t i = 0; i < 10; ++i) {
    buf.update_priorities({i}, {std::pow(10.0, static_cast<double>(i)) - 1.0});
    REQUIRE(buf.priority_of(i) == 1.0);
  }

  std::vector<std::size_t> counts(10, 0);
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const auto got = buf.sample(kQuery, 1);
    counts[static_cast<std::size_t>(got.items[0].episode)]++;
  }
  for (const std::size_t c : counts) {
    REQUIRE(std::abs(static_cast<double>(c) / trials - 0.1) <= 0.02);
  }
  REQUIRE(lser::chi_square_uniform_pvalue(counts) > 0.01);
}

TEST_CASE("per weights normalize to one for flat priorities at beta=1", "[baselines]") {
  PerBuffer buf(8, 0.6, /*beta=*/1.0, 0.01, 17);
  for (int i = 0; i < 8; ++i) buf.push(with_reward(0.1 * i, i));
  const auto got = buf.sample(kQuery, 4);
  REQUIRE(got.weights.size() == 4);
  for (const double w : got.weights) REQUIRE(w == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(got.indices.size() == 4);

  PerBuffer empty(8, 0.6, 1.0, 0.01, 17);
  REQUIRE_THROWS_AS(empty.sample(kQuery, 1), std::runtime_error);
}
