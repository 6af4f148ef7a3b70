#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "lser/rng.hpp"

namespace lser {

// Ornstein-Uhlenbeck process used to perturb actions during exploration:
//   x <- x + theta * (mu - x) * dt + sigma * sqrt(dt) * N(0, 1)
class OuNoise {
 public:
  OuNoise(int dim, double theta, double sigma, double mu, double dt, std::uint64_t seed)
      : x_(Eigen::VectorXd::Constant(dim, mu)),
        theta_(theta),
        sigma_(sigma),
        mu_(mu),
        dt_(dt),
        rng_(seed) {
    if (dim < 1) throw std::invalid_argument("OuNoise: dim must be >= 1");
    if (dt <= 0.0) throw std::invalid_argument("OuNoise: dt must be > 0");
  }

  // Returns the process to its mean; called at episode boundaries.
  void reset() { x_.setConstant(mu_); }

  void set_state(const Eigen::VectorXd& x) {
    if (x.size() != x_.size()) throw std::invalid_argument("OuNoise: state dimension mismatch");
    x_ = x;
  }

  const Eigen::VectorXd& step() {
    const double scale = sigma_ * std::sqrt(dt_);
    for (Eigen::Index i = 0; i < x_.size(); ++i) {
      x_(i) += theta_ * (mu_ - x_(i)) * dt_ + scale * rng_.gaussian();
    }
    return x_;
  }

  const Eigen::VectorXd& state() const { return x_; }
  double theta() const { return theta_; }
  double sigma() const { return sigma_; }
  double mu() const { return mu_; }
  double dt() const { return dt_; }

 private:
  Eigen::VectorXd x_;
  double theta_;
  double sigma_;
  double mu_;
  double dt_;
  Rng rng_;
};

}  // namespace lser
