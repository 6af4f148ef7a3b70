#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lser/rng.hpp"
#include "lser/transition.hpp"

namespace lser {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct EnvConfig {
  int interest_dim = 8;     // d_u; the action dimension equals this
  double kappa = 5.0;       // click sharpness
  double drift = 0.05;      // interest drift rate per step
  double obs_noise = 0.01;  // observation noise scale
  int max_steps = 10;       // episode length cap
  int patience = 3;         // consecutive non-clicks before the user leaves
  std::uint64_t seed = 0;

  int action_dim() const { return interest_dim; }
  // Observation = noisy interest vector plus the normalized step fraction.
  int state_dim() const { return interest_dim + 1; }

  void validate() const {
    if (interest_dim < 1) throw std::invalid_argument("EnvConfig: interest_dim must be >= 1");
    if (kappa <= 0.0) throw std::invalid_argument("EnvConfig: kappa must be > 0");
    if (drift < 0.0) throw std::invalid_argument("EnvConfig: drift must be >= 0");
    if (obs_noise < 0.0) throw std::invalid_argument("EnvConfig: obs_noise must be >= 0");
    if (max_steps < 1) throw std::invalid_argument("EnvConfig: max_steps must be >= 1");
    if (patience < 1) throw std::invalid_argument("EnvConfig: patience must be >= 1");
  }
};

struct StepResult {
  StateVector next_state;
  double reward = 0.0;  // 1 on click, 0 otherwise
  bool done = false;
};

// Synthetic online-recommendation task. Each episode draws a user with a
// unit-norm interest vector that drifts a little every step while being
// pulled back toward the user's static core. A recommendation (continuous
// action) clicks with probability logistic(kappa * cos(interest, action)).
// The episode ends at max_steps or after `patience` consecutive non-clicks.
//
// All randomness is re-derived per episode from (seed, episode index), so
// two runs with the same seed see identical user populations regardless of
// how the episodes themselves unfold. That is what makes paired
// variant comparisons possible.
class ClickEnv {
 public:
  explicit ClickEnv(EnvConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const EnvConfig& config() const { return cfg_; }
  std::int64_t episode() const { return episode_; }
  int steps_taken() const { return step_; }
  bool done() const { return done_; }
  const Eigen::VectorXd& interest() const { return interest_; }
  const Eigen::VectorXd& static_core() const { return static_core_; }

  // Starts the next episode with a fresh user and returns the first
  // observation.
  StateVector reset() {
    ++episode_;
    const std::uint64_t ep = static_cast<std::uint64_t>(episode_);
    user_rng_ = Rng(derive_seed(cfg_.seed, splitmix64(0x75736572ull ^ ep)));
    click_rng_ = Rng(derive_seed(cfg_.seed, splitmix64(0x636c636bull ^ ep)));
    obs_rng_ = Rng(derive_seed(cfg_.seed, splitmix64(0x6f627376ull ^ ep)));
    static_core_ = random_unit(user_rng_);
    interest_ = static_core_;
    step_ = 0;
    misses_ = 0;
    done_ = false;
    return observation();
  }

  // Probability that the current user clicks this recommendation. Only the
  // action's direction matters; the zero action never clicks. Pure, consumes
  // no randomness.
  double click_probability(const ActionVector& action) const {
    if (action.size() != cfg_.interest_dim) {
      throw std::invalid_argument("ClickEnv: action dimension mismatch");
    }
    const double norm = action.norm();
    return norm > 0.0 ? logistic(cfg_.kappa * interest_.dot(action) / norm) : 0.0;
  }

  StepResult step(const ActionVector& action) {
    if (done_) throw std::logic_error("ClickEnv: step after episode finished");
    const double q = click_probability(action);
    const double u = click_rng_.uniform();
    const double reward = u < q ? 1.0 : 0.0;
    misses_ = reward > 0.0 ? 0 : misses_ + 1;

    // Drift: random walk plus a weak pull back to the static core, then
    // renormalize so the interest stays on the unit sphere.
    Eigen::VectorXd g(cfg_.interest_dim);
    for (int i = 0; i < cfg_.interest_dim; ++i) g(i) = user_rng_.gaussian();
    interest_ += cfg_.drift * g + 0.1 * cfg_.drift * (static_core_ - interest_);
    interest_.normalize();

    ++step_;
    done_ = step_ >= cfg_.max_steps || misses_ >= cfg_.patience;
    return StepResult{observation(), reward, done_};
  }

 private:
  Eigen::VectorXd random_unit(Rng& rng) const {
    Eigen::VectorXd v(cfg_.interest_dim);
    do {
      for (int i = 0; i < cfg_.interest_dim; ++i) v(i) = rng.gaussian();
    } while (v.norm() == 0.0);
    v.normalize();
    return v;
  }

  StateVector observation() {
    StateVector obs(cfg_.state_dim());
    for (int i = 0; i < cfg_.interest_dim; ++i) {
      obs(i) = interest_(i) + cfg_.obs_noise * obs_rng_.gaussian();
    }
    obs(cfg_.interest_dim) = static_cast<double>(step_) / static_cast<double>(cfg_.max_steps);
    return obs;
  }

  EnvConfig cfg_;
  Eigen::VectorXd interest_;
  Eigen::VectorXd static_core_;
  int step_ = 0;
  int misses_ = 0;
  bool done_ = true;
  std::int64_t episode_ = -1;
  Rng user_rng_;
  Rng click_rng_;
  Rng obs_rng_;
};

// Click-through rate of one episode: clicks divided by steps.
inline double episode_ctr(const std::vector<double>& rewards) {
  if (rewards.empty()) throw std::invalid_argument("episode_ctr: empty reward list");
  double clicks = 0.0;
  for (const double r : rewards) clicks += r;
  return clicks / static_cast<double>(rewards.size());
}

}  // namespace lser
