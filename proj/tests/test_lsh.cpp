#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "lser/lsh.hpp"
#include "test_util.hpp"
#include "lser/rng.hpp"

using lser::encode;
using lser::HyperplaneSet;
using lser::jaccard;
using lser::make_hyperplanes;
using lser::nearest_codes;
using lser::Rng;

namespace {

// Independent Jaccard reference built on explicit position sets.
double set_jaccard(const std::string& a, const std::string& b) {
  std::set<std::size_t> sa, sb, inter, uni;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == '1') sa.insert(i);
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] == '1') sb.insert(i);
  }
  if (sa.empty() && sb.empty()) return 1.0;
  for (const auto i : sa) {
    if (sb.count(i)) inter.insert(i);
  }
  uni = sa;
  uni.insert(sb.begin(), sb.end());
  return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

Eigen::VectorXd random_unit(int dim, Rng& rng) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.gaussian();
  v.normalize();
  return v;
}

}  // namespace

TEST_CASE("hyperplane sets are seeded, shaped, and nondegenerate", "[lsh]") {
  const HyperplaneSet a = make_hyperplanes(3, 4, 7);
  const HyperplaneSet b = make_hyperplanes(3, 4, 7);
  REQUIRE(a.normals.rows() == 3);
  REQUIRE(a.normals.cols() == 4);
  REQUIRE(lser_test::bitwise_equal(a.normals, b.normals));

  const HyperplaneSet big = make_hyperplanes(20, 88, 1);
  REQUIRE(big.bits() == 20);
  REQUIRE(big.dim() == 88);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const HyperplaneSet hp = make_hyperplanes(8, 5, seed);
    for (int i = 0; i < hp.bits(); ++i) REQUIRE(!hp.normals.row(i).isZero());
  }

  REQUIRE_THROWS_AS(make_hyperplanes(0, 4, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(make_hyperplanes(3, 0, 1), std::invalid_argument);
}

TEST_CASE("encode follows the sign rule and maps boundary dots to 0", "[lsh]") {
  HyperplaneSet single;
  single.normals.resize(1, 2);
  single.normals << 1.0, 0.0;

  Eigen::VectorXd s1(2);
  s1 << 0.5, -3.0;
  REQUIRE(encode(single, s1) == "1");

  Eigen::VectorXd s2(2);
  s2 << 0.0, 9.0;  // dot is exactly zero
  REQUIRE(encode(single, s2) == "0");

  HyperplaneSet three;
  three.normals.resize(3, 2);
  three.normals << 1.0, 0.0, 0.0, 1.0, 1.0, 1.0;
  Eigen::VectorXd s(2);
  s << 1.0, -2.0;
  // brute-force oracle: evaluate every dot product directly
  std::string expected;
  for (int i = 0; i < 3; ++i) {
    expected += three.normals.row(i).dot(s) > 0.0 ? '1' : '0';
  }
  REQUIRE(expected == "100");
  REQUIRE(encode(three, s) == expected);

  Eigen::VectorXd wrong(3);
  wrong << 1.0, 2.0, 3.0;
  REQUIRE_THROWS_AS(encode(three, wrong), std::invalid_argument);
}

TEST_CASE("encode is deterministic and invariant to positive scaling", "[lsh]") {
  Rng rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    const HyperplaneSet hp = make_hyperplanes(12, 6, 1000 + rep);
    Eigen::VectorXd s(6);
    for (int i = 0; i < 6; ++i) s(i) = rng.gaussian();
    const std::string code = encode(hp, s);
    REQUIRE(encode(hp, s) == code);
    for (const double lambda : {1e-6, 0.5, 3.0, 1e6}) {
      REQUIRE(encode(hp, Eigen::VectorXd(lambda * s)) == code);
    }
  }
}

TEST_CASE("angular collision probability at canonical angles", "[lsh]") {
  Eigen::VectorXd u(2);
  u << 1.0, 0.0;
  Eigen::VectorXd v(2);
  v << 0.0, 1.0;
  Eigen::VectorXd w(2);
  w << -1.0, 0.0;

  REQUIRE(lser::angular_collision_prob(u, u) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(lser::angular_collision_prob(u, v) == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(lser::angular_collision_prob(u, w) == Catch::Approx(0.0).margin(1e-12));

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  REQUIRE_THROWS_AS(lser::angular_collision_prob(u, zero), std::invalid_argument);
  Eigen::VectorXd longer(3);
  longer << 1.0, 0.0, 0.0;
  REQUIRE_THROWS_AS(lser::angular_collision_prob(u, longer), std::invalid_argument);
}

TEST_CASE("jaccard matches the set-based reference", "[lsh]") {
  REQUIRE(jaccard("110", "110") == 1.0);
  REQUIRE(jaccard("110", "100") == 0.5);
  REQUIRE(jaccard("000", "000") == 1.0);
  REQUIRE_THROWS_AS(jaccard("10", "100"), std::invalid_argument);

  Rng rng(77);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t len = 1 + rng.below(10);
    std::string a(len, '0');
    std::string b(len, '0');
    for (std::size_t i = 0; i < len; ++i) {
      if (rng.uniform() < 0.5) a[i] = '1';
      if (rng.uniform() < 0.5) b[i] = '1';
    }
    const double j = jaccard(a, b);
    REQUIRE(j == set_jaccard(a, b));
    REQUIRE(j == jaccard(b, a));
    REQUIRE(j >= 0.0);
    REQUIRE(j <= 1.0);
    REQUIRE((j == 1.0) == (a == b));
  }
}

TEST_CASE("nearest_codes ranks by jaccard with lexicographic ties", "[lsh]") {
  const std::vector<std::string> occupied{"110", "100", "011"};
  // brute-force oracle over all occupied codes
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& code : occupied) scored.emplace_back(set_jaccard("111", code), code);
  std::sort(scored.begin(), scored.end(), [](const auto& l, const auto& r) {
    if (l.first != r.first) return l.first > r.first;
    return l.second < r.second;
  });
  const auto got = nearest_codes("111", occupied, 2);
  REQUIRE(got.size() == 2);
  REQUIRE(got[0] == scored[0].second);
  REQUIRE(got[1] == scored[1].second);
  REQUIRE(got == std::vector<std::string>{"011", "110"});

  REQUIRE(nearest_codes("10", {"10"}, 2) == std::vector<std::string>{"10"});
  REQUIRE_THROWS(nearest_codes("1", {}, 1));

  // deterministic ordering regardless of the occupied order
  std::vector<std::string> shuffled{"011", "110", "100"};
  REQUIRE(nearest_codes("111", shuffled, 3) == nearest_codes("111", occupied, 3));
}

TEST_CASE("empirical bit-collision frequency follows 1 - theta/pi", "[lsh]") {
  const int trials = 10000;
  const int dim = 5;
  Rng rng(2024);
  for (const double theta :
       {std::numbers::pi / 6.0, std::numbers::pi / 3.0, std::numbers::pi / 2.0}) {
    std::size_t collisions = 0;
    for (int t = 0; t < trials; ++t) {
      const Eigen::VectorXd u = random_unit(dim, rng);
      Eigen::VectorXd w(dim);
      double wn = 0.0;
      do {
        for (int i = 0; i < dim; ++i) w(i) = rng.gaussian();
        w -= w.dot(u) * u;
        wn = w.norm();
      } while (wn < 1e-12);
      w /= wn;
      const Eigen::VectorXd v = std::cos(theta) * u + std::sin(theta) * w;
      const HyperplaneSet hp = make_hyperplanes(1, dim, 90000 + static_cast<std::uint64_t>(t));
      collisions += static_cast<std::size_t>(encode(hp, u) == encode(hp, v));
    }
    const double freq = static_cast<double>(collisions) / trials;
    const double expected = 1.0 - theta / std::numbers::pi;
    INFO("theta=" << theta);
    REQUIRE(std::abs(freq - expected) <= 0.02);
  }
}
