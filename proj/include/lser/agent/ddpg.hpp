#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lser/agent/ou_noise.hpp"
#include "lser/format.hpp"
#include "lser/nn/mlp.hpp"
#include "lser/replay/replay_buffer.hpp"
#include "lser/rng.hpp"
#include "lser/transition.hpp"

namespace lser {

struct DdpgConfig {
  int state_dim = 0;
  int action_dim = 0;
  int hidden1 = 128;
  int hidden2 = 128;
  double gamma = 0.99;
  double tau = 0.001;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  std::uint64_t seed = 0;
};

// Deterministic-policy actor-critic trained from replayed transitions.
// The critic regresses onto r + gamma * Q'(s', pi'(s')) computed with the
// target networks (the bootstrap term is dropped on terminal transitions);
// the actor ascends the critic's value of its own action. Both targets track
// their online networks through soft updates with rate tau.
class DdpgAgent {
 public:
  explicit DdpgAgent(const DdpgConfig& cfg)
      : cfg_(cfg),
        actor_({cfg.state_dim, cfg.hidden1, cfg.hidden2, cfg.action_dim},
               OutputActivation::tanh_bounded, derive_seed(cfg.seed, 0xac7012ull)),
        critic_({cfg.state_dim + cfg.action_dim, cfg.hidden1, cfg.hidden2, 1},
                OutputActivation::linear, derive_seed(cfg.seed, 0xc2171cull)),
        target_actor_(actor_),
        target_critic_(critic_) {
    if (cfg.state_dim < 1 || cfg.action_dim < 1) {
      throw std::invalid_argument("DdpgAgent: state/action dims must be >= 1");
    }
    if (cfg.gamma < 0.0 || cfg.gamma > 1.0) {
      throw std::invalid_argument("DdpgAgent: gamma must lie in [0, 1]");
    }
    if (cfg.tau <= 0.0 || cfg.tau > 1.0) {
      throw std::invalid_argument("DdpgAgent: tau must lie in (0, 1]");
    }
  }

  const DdpgConfig& config() const { return cfg_; }

  Eigen::VectorXd act(const Eigen::VectorXd& state) const { return actor_.forward_one(state); }

  Eigen::VectorXd act_with_noise(const Eigen::VectorXd& state, OuNoise& noise) const {
    Eigen::VectorXd a = act(state) + noise.step();
    return a.cwiseMax(-1.0).cwiseMin(1.0);
  }

  struct CriticEval {
    double loss = 0.0;
    MlpGrads grads;
    Eigen::VectorXd td_errors;
  };

  // Mean squared error against the target-network bootstrap, optionally
  // weighted per sample (importance weights from prioritized replay).
  CriticEval critic_loss_and_grads(const std::vector<Transition>& batch,
                                   const std::vector<double>& is_weights = {}) const {
    const std::size_t n = batch.size();
    if (n == 0) throw std::invalid_argument("critic_loss_and_grads: empty batch");
    if (!is_weights.empty() && is_weights.size() != n) {
      throw std::invalid_argument("critic_loss_and_grads: weight count mismatch");
    }
    Eigen::MatrixXd next_states(n, cfg_.state_dim);
    for (std::size_t i = 0; i < n; ++i) next_states.row(i) = batch[i].next_state.transpose();
    const Eigen::MatrixXd next_actions = target_actor_.forward(next_states);
    Eigen::MatrixXd next_q_in(n, cfg_.state_dim + cfg_.action_dim);
    next_q_in << next_states, next_actions;
    const Eigen::MatrixXd next_q = target_critic_.forward(next_q_in);

    Eigen::MatrixXd q_in(n, cfg_.state_dim + cfg_.action_dim);
    for (std::size_t i = 0; i < n; ++i) {
      q_in.row(i).head(cfg_.state_dim) = batch[i].state.transpose();
      q_in.row(i).tail(cfg_.action_dim) = batch[i].action.transpose();
    }
    Mlp::Cache cache;
    const Eigen::MatrixXd q = critic_.forward(q_in, &cache);

    CriticEval eval;
    eval.td_errors.resize(static_cast<Eigen::Index>(n));
    Eigen::MatrixXd dq(n, 1);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double bootstrap = batch[i].terminal ? 0.0 : cfg_.gamma * next_q(static_cast<Eigen::Index>(i), 0);
      const double target = batch[i].reward + bootstrap;
      const double delta = target - q(static_cast<Eigen::Index>(i), 0);
      const double w = is_weights.empty() ? 1.0 : is_weights[i];
      eval.loss += w * delta * delta * inv_n;
      eval.td_errors(static_cast<Eigen::Index>(i)) = delta;
      dq(static_cast<Eigen::Index>(i), 0) = -2.0 * w * delta * inv_n;
    }
    eval.grads = critic_.backward(cache, dq);
    return eval;
  }

  struct ActorEval {
    double loss = 0.0;
    MlpGrads grads;
  };

  // loss = -mean Q(s, pi(s)); the gradient reaches the actor through the
  // critic's input. The critic's own parameters are left untouched.
  ActorEval actor_loss_and_grads(const std::vector<Transition>& batch) const {
    const std::size_t n = batch.size();
    if (n == 0) throw std::invalid_argument("actor_loss_and_grads: empty batch");
    Eigen::MatrixXd states(n, cfg_.state_dim);
    for (std::size_t i = 0; i < n; ++i) states.row(i) = batch[i].state.transpose();
    Mlp::Cache actor_cache;
    const Eigen::MatrixXd actions = actor_.forward(states, &actor_cache);
    Eigen::MatrixXd q_in(n, cfg_.state_dim + cfg_.action_dim);
    q_in << states, actions;
    Mlp::Cache critic_cache;
    const Eigen::MatrixXd q = critic_.forward(q_in, &critic_cache);

    ActorEval eval;
    eval.loss = -q.col(0).mean();
    const Eigen::MatrixXd dq =
        Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), 1,
                                  -1.0 / static_cast<double>(n));
    Eigen::MatrixXd dinput;
    critic_.backward(critic_cache, dq, &dinput);
    const Eigen::MatrixXd dactions = dinput.rightCols(cfg_.action_dim);
    eval.grads = actor_.backward(actor_cache, dactions);
    return eval;
  }

  struct UpdateDiag {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    Eigen::VectorXd td_errors;
  };

  // One learning step: critic gradient step, then actor gradient step
  // against the freshly updated critic, then soft target updates.
  UpdateDiag update(const SampleBatch& batch) {
    UpdateDiag diag;
    CriticEval ce = critic_loss_and_grads(batch.items, batch.weights);
    critic_.apply_gradient(ce.grads, cfg_.critic_lr);
    ActorEval ae = actor_loss_and_grads(batch.items);
    actor_.apply_gradient(ae.grads, cfg_.actor_lr);
    soft_update_targets();
    diag.critic_loss = ce.loss;
    diag.actor_loss = ae.loss;
    diag.td_errors = std::move(ce.td_errors);
    return diag;
  }

  void soft_update_targets() {
    target_actor_.soft_update_from(actor_, cfg_.tau);
    target_critic_.soft_update_from(critic_, cfg_.tau);
  }

  bool all_finite() const {
    return actor_.all_finite() && critic_.all_finite() && target_actor_.all_finite() &&
           target_critic_.all_finite();
  }

  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  Mlp& target_actor() { return target_actor_; }
  Mlp& target_critic() { return target_critic_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& target_actor() const { return target_actor_; }
  const Mlp& target_critic() const { return target_critic_; }

  // Checkpoint layout (text): a magic line, the config line (including the
  // construction seed), then for each network a header with its layer sizes
  // followed by one line of parameters in flatten() order.
  void save(std::ostream& os) const {
    os << "lser-ddpg-checkpoint 1\n";
    os << cfg_.state_dim << ' ' << cfg_.action_dim << ' ' << cfg_.hidden1 << ' ' << cfg_.hidden2
       << ' ' << fmt_double(cfg_.gamma) << ' ' << fmt_double(cfg_.tau) << ' '
       << fmt_double(cfg_.actor_lr) << ' ' << fmt_double(cfg_.critic_lr) << ' ' << cfg_.seed
       << '\n';
    const Mlp* nets[] = {&actor_, &critic_, &target_actor_, &target_critic_};
    const char* names[] = {"actor", "critic", "target_actor", "target_critic"};
    for (int k = 0; k < 4; ++k) {
      os << names[k];
      for (const int s : nets[k]->layer_sizes()) os << ' ' << s;
      os << '\n';
      const auto flat = nets[k]->flatten();
      for (std::size_t i = 0; i < flat.size(); ++i) {
        if (i) os << ' ';
        os << fmt_double(flat[i]);
      }
      os << '\n';
    }
  }

  static DdpgAgent load(std::istream& is) {
    std::string magic, version;
    is >> magic >> version;
    if (magic != "lser-ddpg-checkpoint" || version != "1") {
      throw std::runtime_error("checkpoint: bad header");
    }
    DdpgConfig cfg;
    is >> cfg.state_dim >> cfg.action_dim >> cfg.hidden1 >> cfg.hidden2 >> cfg.gamma >> cfg.tau >>
        cfg.actor_lr >> cfg.critic_lr >> cfg.seed;
    if (!is) throw std::runtime_error("checkpoint: truncated config");
    DdpgAgent agent(cfg);
    Mlp* nets[] = {&agent.actor_, &agent.critic_, &agent.target_actor_, &agent.target_critic_};
    const char* names[] = {"actor", "critic", "target_actor", "target_critic"};
    for (int k = 0; k < 4; ++k) {
      std::string name;
      is >> name;
      if (name != names[k]) throw std::runtime_error("checkpoint: unexpected section " + name);
      std::vector<int> sizes(nets[k]->layer_sizes().size());
      for (int& s : sizes) is >> s;
      if (sizes != nets[k]->layer_sizes()) throw std::runtime_error("checkpoint: shape mismatch");
      std::vector<double> flat(nets[k]->parameter_count());
      for (double& v : flat) is >> v;
      if (!is) throw std::runtime_error("checkpoint: truncated parameters");
      nets[k]->unflatten(flat);
    }
    return agent;
  }

 private:
  DdpgConfig cfg_;
  Mlp actor_;
  Mlp critic_;
  Mlp target_actor_;
  Mlp target_critic_;
};

struct TrainStepOptions {
  std::size_t batch_size = 64;
  std::size_t warmup = 640;
  bool explore = true;
};

struct TrainStepResult {
  Eigen::VectorXd action;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool done = false;
  bool updated = false;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
};

// One environment interaction: act (with exploration noise unless disabled),
// step the environment, run a learning update when the buffer has reached
// warmup (sampling is conditioned on the current state; buffers without
// state-aware sampling ignore the query), and finally store the fresh
// transition. Storage deliberately happens after the update.
template <class Env>
TrainStepResult train_step(DdpgAgent& agent, ReplayBuffer& buffer, Env& env,
                           const Eigen::VectorXd& state, OuNoise& noise,
                           const TrainStepOptions& opt) {
  TrainStepResult out;
  out.action = opt.explore ? agent.act_with_noise(state, noise) : agent.act(state);
  const auto step = env.step(out.action);
  out.reward = step.reward;
  out.next_state = step.next_state;
  out.done = step.done;

  if (buffer.size() > 0 && buffer.size() >= opt.warmup) {
    const SampleBatch batch = buffer.sample(state, opt.batch_size);
    const DdpgAgent::UpdateDiag diag = agent.update(batch);
    if (!batch.indices.empty()) {
      std::vector<double> td(batch.indices.size());
      for (std::size_t i = 0; i < td.size(); ++i) td[i] = diag.td_errors(static_cast<Eigen::Index>(i));
      buffer.update_priorities(batch.indices, td);
    }
    out.updated = true;
    out.critic_loss = diag.critic_loss;
    out.actor_loss = diag.actor_loss;
  }

  Transition t;
  t.state = state;
  t.action = out.action;
  t.terminal = step.done;
  t.next_state = step.next_state;
  t.reward = step.reward;
  t.episode = env.episode();
  buffer.push(t);
  return out;
}

}  // namespace lser
