#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "lser/agent/ddpg.hpp"
#include "lser/agent/ou_noise.hpp"
#include "lser/nn/mlp.hpp"
#include "test_util.hpp"
#include "lser/rng.hpp"

using lser::DdpgAgent;
using lser::DdpgConfig;
using lser::Mlp;
using lser::MlpGrads;
using lser::OuNoise;
using lser::OutputActivation;
using lser::Rng;
using lser::Transition;

namespace {

DdpgConfig small_config(std::uint64_t seed) {
  DdpgConfig cfg;
  cfg.state_dim = 5;
  cfg.action_dim = 2;
  cfg.hidden1 = 16;
  cfg.hidden2 = 16;
  cfg.gamma = 0.95;
  cfg.tau = 0.01;
  cfg.seed = seed;
  return cfg;
}

std::vector<Transition> random_batch(int n, int state_dim, int action_dim, Rng& rng) {
  std::vector<Transition> batch(n);
  for (auto& t : batch) {
    t.state = Eigen::VectorXd::NullaryExpr(state_dim, [&](Eigen::Index) { return rng.gaussian(); });
    t.action = Eigen::VectorXd::NullaryExpr(action_dim,
                                            [&](Eigen::Index) { return 2.0 * rng.uniform() - 1.0; });
    t.next_state =
        Eigen::VectorXd::NullaryExpr(state_dim, [&](Eigen::Index) { return rng.gaussian(); });
    t.reward = rng.gaussian();
    t.terminal = rng.uniform() < 0.25;
  }
  return batch;
}

// |a - b| relative to the larger magnitude, with an absolute floor for
// gradients that are genuinely zero.
bool grads_close(const std::vector<double>& a, const std::vector<double>& b, double rel_tol,
                 double abs_floor, double* worst = nullptr) {
  REQUIRE(a.size() == b.size());
  bool ok = true;
  double w = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = std::abs(a[i] - b[i]);
    const double scale = std::max(std::abs(a[i]), std::abs(b[i]));
    if (diff > abs_floor && diff > rel_tol * scale) ok = false;
    if (scale > 0.0) w = std::max(w, diff / std::max(scale, abs_floor));
  }
  if (worst) *worst = w;
  return ok;
}

}  // namespace

TEST_CASE("mlp forward basics", "[agent]") {
  Mlp net({3, 8, 8, 2}, OutputActivation::tanh_bounded, 1);

  SECTION("zero parameters give zero output") {
    net.set_zero();
    const Eigen::VectorXd out = net.forward_one(Eigen::Vector3d(0.3, -2.0, 5.0));
    REQUIRE(out.norm() == 0.0);
  }

  SECTION("tanh output is bounded for random inputs") {
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
      Eigen::VectorXd x =
          Eigen::VectorXd::NullaryExpr(3, [&](Eigen::Index) { return 10.0 * rng.gaussian(); });
      const Eigen::VectorXd out = net.forward_one(x);
      REQUIRE(out.cwiseAbs().maxCoeff() <= 1.0);
    }
  }

  SECTION("same seed reproduces parameters bit-exactly") {
    Mlp twin({3, 8, 8, 2}, OutputActivation::tanh_bounded, 1);
    REQUIRE(net.flatten() == twin.flatten());
    Mlp other({3, 8, 8, 2}, OutputActivation::tanh_bounded, 2);
    REQUIRE(net.flatten() != other.flatten());
  }

  SECTION("input dimension is checked") {
    REQUIRE_THROWS_AS(net.forward_one(Eigen::Vector2d(1.0, 2.0)), std::invalid_argument);
  }
}

TEST_CASE("critic forward is linear-output and finite", "[agent]") {
  DdpgAgent agent(small_config(3));
  agent.critic().set_zero();
  agent.target_critic().set_zero();
  std::vector<Transition> batch;
  Rng rng(4);
  batch = random_batch(4, 5, 2, rng);
  const auto eval = agent.critic_loss_and_grads(batch);
  // zero critic and target critic, so Q == 0 and every target is just r
  double expect = 0.0;
  for (const auto& t : batch) expect += t.reward * t.reward / 4.0;
  REQUIRE(eval.loss == Catch::Approx(expect).epsilon(1e-12));

  DdpgAgent fresh(small_config(5));
  for (int i = 0; i < 1000; ++i) {
    const auto b = random_batch(1, 5, 2, rng);
    const auto e = fresh.critic_loss_and_grads(b);
    REQUIRE(std::isfinite(e.loss));
  }
}

TEST_CASE("terminal transitions drop the bootstrap term", "[agent]") {
  DdpgConfig cfg = small_config(6);
  DdpgAgent agent(cfg);
  agent.critic().set_zero();
  Transition t;
  t.state = Eigen::VectorXd::Zero(5);
  t.action = Eigen::VectorXd::Zero(2);
  t.next_state = Eigen::VectorXd::Ones(5);
  t.reward = 1.0;
  t.terminal = true;
  const auto eval = agent.critic_loss_and_grads({t});
  REQUIRE(eval.loss == 1.0);  // (1 - 0)^2
  REQUIRE(eval.td_errors(0) == 1.0);
}

TEST_CASE("gamma zero reduces the loss to mean squared reward error", "[agent]") {
  DdpgConfig cfg = small_config(7);
  cfg.gamma = 0.0;
  DdpgAgent agent(cfg);
  Rng rng(8);
  const auto batch = random_batch(6, 5, 2, rng);
  const auto eval = agent.critic_loss_and_grads(batch);

  // oracle: recompute (r - Q)^2 with plain forwards
  double expect = 0.0;
  for (const auto& t : batch) {
    Eigen::VectorXd in(7);
    in << t.state, t.action;
    const double q = agent.critic().forward_one(in)(0);
    expect += (t.reward - q) * (t.reward - q) / 6.0;
  }
  REQUIRE(eval.loss == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("critic analytic gradients match central finite differences", "[agent]") {
  const double h = 1e-5;
  for (int instance = 0; instance < 20; ++instance) {
    DdpgAgent agent(small_config(100 + instance));
    Rng rng(300 + instance);
    const auto batch = random_batch(8, 5, 2, rng);
    std::vector<double> weights;
    if (instance % 4 == 0) {
      for (int i = 0; i < 8; ++i) weights.push_back(0.25 + 0.1 * i);
    }

    const auto analytic = Mlp::flatten_grads(agent.critic_loss_and_grads(batch, weights).grads);
    std::vector<double> params = agent.critic().flatten();
    std::vector<double> fd(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double orig = params[k];
      params[k] = orig + h;
      agent.critic().unflatten(params);
      const double up = agent.critic_loss_and_grads(batch, weights).loss;
      params[k] = orig - h;
      agent.critic().unflatten(params);
      const double down = agent.critic_loss_and_grads(batch, weights).loss;
      params[k] = orig;
      fd[k] = (up - down) / (2.0 * h);
    }
    agent.critic().unflatten(params);
    double worst = 0.0;
    const bool ok = grads_close(analytic, fd, 1e-4, 1e-9, &worst);
    INFO("instance " << instance << " worst rel err " << worst);
    REQUIRE(ok);
  }
}

TEST_CASE("actor analytic gradients match central finite differences", "[agent]") {
  const double h = 1e-5;
  for (int instance = 0; instance < 20; ++instance) {
    DdpgAgent agent(small_config(200 + instance));
    Rng rng(500 + instance);
    const auto batch = random_batch(8, 5, 2, rng);

    const auto analytic = Mlp::flatten_grads(agent.actor_loss_and_grads(batch).grads);
    std::vector<double> params = agent.actor().flatten();
    std::vector<double> fd(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double orig = params[k];
      params[k] = orig + h;
      agent.actor().unflatten(params);
      const double up = agent.actor_loss_and_grads(batch).loss;
      params[k] = orig - h;
      agent.actor().unflatten(params);
      const double down = agent.actor_loss_and_grads(batch).loss;
      params[k] = orig;
      fd[k] = (up - down) / (2.0 * h);
    }
    agent.actor().unflatten(params);
    double worst = 0.0;
    const bool ok = grads_close(analytic, fd, 1e-4, 1e-9, &worst);
    INFO("instance " << instance << " worst rel err " << worst);
    REQUIRE(ok);
  }
}

TEST_CASE("zero critic produces a zero actor gradient", "[agent]") {
  DdpgAgent agent(small_config(9));
  agent.critic().set_zero();
  Rng rng(10);
  const auto batch = random_batch(4, 5, 2, rng);
  const auto eval = agent.actor_loss_and_grads(batch);
  for (const double g : Mlp::flatten_grads(eval.grads)) REQUIRE(g == 0.0);
}

TEST_CASE("an actor step descends the actor loss", "[agent]") {
  DdpgAgent agent(small_config(11));
  Rng rng(12);
  const auto batch = random_batch(8, 5, 2, rng);
  const auto before = agent.actor_loss_and_grads(batch);
  agent.actor().apply_gradient(before.grads, 1e-3);
  const auto after = agent.actor_loss_and_grads(batch);
  REQUIRE(after.loss < before.loss);
}

TEST_CASE("soft updates mix targets geometrically", "[agent]") {
  SECTION("tau endpoints") {
    Mlp online({3, 4, 2}, OutputActivation::linear, 21);
    Mlp target({3, 4, 2}, OutputActivation::linear, 22);
    Mlp frozen = target;

    Mlp t1 = target;
    lser::soft_update(t1, online, 1.0);
    REQUIRE(t1.flatten() == online.flatten());

    Mlp t0 = target;
    lser::soft_update(t0, online, 0.0);
    REQUIRE(t0.flatten() == frozen.flatten());
  }

  SECTION("tau = 0.001 moves zeros toward ones by exactly tau") {
    Mlp online({2, 3, 1}, OutputActivation::linear, 23);
    Mlp target = online;
    target.set_zero();
    // set online to all ones
    std::vector<double> ones(online.parameter_count(), 1.0);
    online.unflatten(ones);
    lser::soft_update(target, online, 0.001);
    for (const double v : target.flatten()) REQUIRE(v == Catch::Approx(0.001).epsilon(1e-12));
  }

  SECTION("k repeated updates equal the closed-form geometric mix") {
    for (const double tau : {0.001, 0.5, 1.0}) {
      Mlp online({4, 8, 3}, OutputActivation::linear, 31);
      Mlp target({4, 8, 3}, OutputActivation::linear, 32);
      const std::vector<double> online_flat = online.flatten();
      const std::vector<double> target0 = target.flatten();
      const int k = 37;
      for (int i = 0; i < k; ++i) lser::soft_update(target, online, tau);
      const double decay = std::pow(1.0 - tau, k);
      const auto got = target.flatten();
      for (std::size_t i = 0; i < got.size(); ++i) {
        const double expect = (1.0 - decay) * online_flat[i] + decay * target0[i];
        REQUIRE(std::abs(got[i] - expect) <= 1e-12);
      }
    }
  }

  SECTION("shape mismatch is rejected") {
    Mlp a({3, 4, 2}, OutputActivation::linear, 1);
    Mlp b({3, 5, 2}, OutputActivation::linear, 1);
    REQUIRE_THROWS_AS(lser::soft_update(a, b, 0.5), std::invalid_argument);
  }
}

TEST_CASE("ou noise mean reversion and stationary spread", "[agent]") {
  SECTION("sigma 0 at the mean is a fixed point") {
    OuNoise noise(3, 0.15, 0.0, 0.7, 1.0, 1);
    for (int i = 0; i < 10; ++i) noise.step();
    for (int i = 0; i < 3; ++i) REQUIRE(noise.state()(i) == Catch::Approx(0.7).epsilon(1e-12));
  }

  SECTION("theta 1, dt 1 reverts fully in one step") {
    OuNoise noise(1, 1.0, 0.0, 0.0, 1.0, 1);
    noise.set_state(Eigen::VectorXd::Constant(1, 2.0));
    REQUIRE(noise.step()(0) == 0.0);
  }

  SECTION("long-run variance matches the discrete stationary value") {
    const double theta = 0.15, sigma = 0.2, dt = 1.0;
    OuNoise noise(1, theta, sigma, 0.0, dt, 77);
    const int steps = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < steps; ++i) {
      const double x = noise.step()(0);
      sum += x;
      sq += x * x;
    }
    const double mean = sum / steps;
    const double var = sq / steps - mean * mean;
    const double expect = sigma * sigma * dt / (2.0 * theta * dt - theta * theta * dt * dt);
    REQUIRE(std::abs(var - expect) <= 0.1 * expect);
  }
}

TEST_CASE("action clipping holds after noise", "[agent]") {
  DdpgAgent agent(small_config(14));
  OuNoise noise(2, 0.15, 2.0, 0.0, 1.0, 15);  // deliberately large sigma
  Rng rng(16);
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd s =
        Eigen::VectorXd::NullaryExpr(5, [&](Eigen::Index) { return rng.gaussian(); });
    const Eigen::VectorXd a = agent.act_with_noise(s, noise);
    REQUIRE(a.cwiseAbs().maxCoeff() <= 1.0);
  }
}

TEST_CASE("batch of one reduces the critic loss to a single squared error", "[agent]") {
  DdpgAgent agent(small_config(17));
  Rng rng(18);
  auto batch = random_batch(1, 5, 2, rng);
  batch[0].terminal = false;
  const auto eval = agent.critic_loss_and_grads(batch);

  Eigen::VectorXd next_in(7);
  next_in << batch[0].next_state, agent.target_actor().forward_one(batch[0].next_state);
  const double xi = agent.target_critic().forward_one(next_in)(0);
  Eigen::VectorXd in(7);
  in << batch[0].state, batch[0].action;
  const double q = agent.critic().forward_one(in)(0);
  const double target = batch[0].reward + agent.config().gamma * xi;
  REQUIRE(eval.loss == Catch::Approx((target - q) * (target - q)).epsilon(1e-12));
}

TEST_CASE("checkpoints round-trip the full agent state", "[agent]") {
  DdpgAgent agent(small_config(19));
  // push agent away from init so targets differ from online nets
  Rng rng(20);
  for (int i = 0; i < 5; ++i) {
    lser::SampleBatch batch;
    batch.items = random_batch(4, 5, 2, rng);
    agent.update(batch);
  }
  std::stringstream ss;
  agent.save(ss);
  DdpgAgent loaded = DdpgAgent::load(ss);
  REQUIRE(loaded.actor().flatten() == agent.actor().flatten());
  REQUIRE(loaded.critic().flatten() == agent.critic().flatten());
  REQUIRE(loaded.target_actor().flatten() == agent.target_actor().flatten());
  REQUIRE(loaded.target_critic().flatten() == agent.target_critic().flatten());
  REQUIRE(loaded.config().seed == agent.config().seed);

  Eigen::VectorXd s = Eigen::VectorXd::NullaryExpr(5, [&](Eigen::Index) { return rng.gaussian(); });
  REQUIRE(lser_test::bitwise_equal(loaded.act(s), agent.act(s)));
}

TEST_CASE("agent parameters stay finite under updates", "[agent]") {
  DdpgAgent agent(small_config(25));
  Rng rng(26);
  for (int i = 0; i < 200; ++i) {
    lser::SampleBatch batch;
    batch.items = random_batch(8, 5, 2, rng);
    agent.update(batch);
    REQUIRE(agent.all_finite());
  }
}
