#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lser/rng.hpp"

namespace lser {

enum class OutputActivation { linear, tanh_bounded };

struct MlpGrads {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
};

// Fully connected network with rectified-linear hidden layers and a linear
// or tanh output, trained by plain gradient steps. Forward/backward are
// written out explicitly; backward() can also return the loss gradient with
// respect to the input, which is how the policy gradient flows through the
// critic into the actor.
//
// Layout: w[l] is (out x in); a_{l+1} = act(w[l] a_l + b[l]). Batches are
// row-major: one sample per row.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> acts;  // acts[0] = input, acts[L] = output
  };

  Mlp(std::vector<int> layer_sizes, OutputActivation out_act, std::uint64_t seed)
      : sizes_(std::move(layer_sizes)), out_act_(out_act) {
    if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least two layer sizes");
    for (const int s : sizes_) {
      if (s < 1) throw std::invalid_argument("Mlp: layer sizes must be >= 1");
    }
    Rng rng(derive_seed(seed, 0x6d6c7000ull));
    const std::size_t layers = sizes_.size() - 1;
    w_.reserve(layers);
    b_.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      const int fan_in = sizes_[l];
      const int fan_out = sizes_[l + 1];
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      Eigen::MatrixXd w(fan_out, fan_in);
      for (int i = 0; i < fan_out; ++i) {
        for (int j = 0; j < fan_in; ++j) w(i, j) = (2.0 * rng.uniform() - 1.0) * bound;
      }
      Eigen::VectorXd b(fan_out);
      for (int i = 0; i < fan_out; ++i) b(i) = (2.0 * rng.uniform() - 1.0) * bound;
      w_.push_back(std::move(w));
      b_.push_back(std::move(b));
    }
  }

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  std::size_t layer_count() const { return w_.size(); }
  OutputActivation output_activation() const { return out_act_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const {
    if (x.cols() != sizes_.front()) throw std::invalid_argument("Mlp: input dimension mismatch");
    Eigen::MatrixXd a = x;
    if (cache) {
      cache->acts.clear();
      cache->acts.push_back(a);
    }
    for (std::size_t l = 0; l < w_.size(); ++l) {
      Eigen::MatrixXd z = a * w_[l].transpose();
      z.rowwise() += b_[l].transpose();
      if (l + 1 < w_.size()) {
        a = z.cwiseMax(0.0);
      } else if (out_act_ == OutputActivation::tanh_bounded) {
        a = z.array().tanh().matrix();
      } else {
        a = std::move(z);
      }
      if (cache) cache->acts.push_back(a);
    }
    return a;
  }

  Eigen::VectorXd forward_one(const Eigen::VectorXd& x) const {
    return forward(x.transpose()).row(0).transpose();
  }

  // Backpropagates dloss_dout (one row per sample) through the cached
  // forward pass. Optionally also yields dloss/dinput.
  MlpGrads backward(const Cache& cache, const Eigen::MatrixXd& dloss_dout,
                    Eigen::MatrixXd* dloss_dinput = nullptr) const {
    const std::size_t layers = w_.size();
    if (cache.acts.size() != layers + 1) throw std::invalid_argument("Mlp: stale cache");
    MlpGrads g;
    g.w.resize(layers);
    g.b.resize(layers);
    Eigen::MatrixXd delta = dloss_dout;
    if (out_act_ == OutputActivation::tanh_bounded) {
      const auto& out = cache.acts.back();
      delta = delta.cwiseProduct((1.0 - out.array().square()).matrix());
    }
    for (std::size_t l = layers; l-- > 0;) {
      const Eigen::MatrixXd& a_prev = cache.acts[l];
      g.w[l] = delta.transpose() * a_prev;
      g.b[l] = delta.colwise().sum().transpose();
      if (l > 0) {
        Eigen::MatrixXd da = delta * w_[l];
        // relu'(z) == 1 exactly where the cached activation is positive
        delta = da.cwiseProduct((cache.acts[l].array() > 0.0).cast<double>().matrix());
      } else if (dloss_dinput) {
        *dloss_dinput = delta * w_[0];
      }
    }
    return g;
  }

  void apply_gradient(const MlpGrads& g, double lr) {
    if (g.w.size() != w_.size()) throw std::invalid_argument("Mlp: gradient shape mismatch");
    for (std::size_t l = 0; l < w_.size(); ++l) {
      w_[l] -= lr * g.w[l];
      b_[l] -= lr * g.b[l];
    }
  }

  // target <- tau * online + (1 - tau) * target
  void soft_update_from(const Mlp& online, double tau) {
    if (online.sizes_ != sizes_) throw std::invalid_argument("soft_update: shape mismatch");
    for (std::size_t l = 0; l < w_.size(); ++l) {
      w_[l] = tau * online.w_[l] + (1.0 - tau) * w_[l];
      b_[l] = tau * online.b_[l] + (1.0 - tau) * b_[l];
    }
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) {
      n += static_cast<std::size_t>(w_[l].size()) + static_cast<std::size_t>(b_[l].size());
    }
    return n;
  }

  // Row-major weights followed by biases, layer by layer. The checkpoint
  // format and the finite-difference probes both rely on this ordering.
  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (std::size_t l = 0; l < w_.size(); ++l) {
      for (Eigen::Index i = 0; i < w_[l].rows(); ++i) {
        for (Eigen::Index j = 0; j < w_[l].cols(); ++j) out.push_back(w_[l](i, j));
      }
      for (Eigen::Index i = 0; i < b_[l].size(); ++i) out.push_back(b_[l](i));
    }
    return out;
  }

  void unflatten(const std::vector<double>& values) {
    if (values.size() != parameter_count()) {
      throw std::invalid_argument("Mlp: flat parameter count mismatch");
    }
    std::size_t k = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) {
      for (Eigen::Index i = 0; i < w_[l].rows(); ++i) {
        for (Eigen::Index j = 0; j < w_[l].cols(); ++j) w_[l](i, j) = values[k++];
      }
      for (Eigen::Index i = 0; i < b_[l].size(); ++i) b_[l](i) = values[k++];
    }
  }

  static std::vector<double> flatten_grads(const MlpGrads& g) {
    std::vector<double> out;
    for (std::size_t l = 0; l < g.w.size(); ++l) {
      for (Eigen::Index i = 0; i < g.w[l].rows(); ++i) {
        for (Eigen::Index j = 0; j < g.w[l].cols(); ++j) out.push_back(g.w[l](i, j));
      }
      for (Eigen::Index i = 0; i < g.b[l].size(); ++i) out.push_back(g.b[l](i));
    }
    return out;
  }

  bool all_finite() const {
    for (std::size_t l = 0; l < w_.size(); ++l) {
      if (!w_[l].allFinite() || !b_[l].allFinite()) return false;
    }
    return true;
  }

  const Eigen::MatrixXd& weights(std::size_t l) const { return w_.at(l); }
  const Eigen::VectorXd& biases(std::size_t l) const { return b_.at(l); }
  void set_weights(std::size_t l, Eigen::MatrixXd w) { w_.at(l) = std::move(w); }
  void set_biases(std::size_t l, Eigen::VectorXd b) { b_.at(l) = std::move(b); }
  void set_zero() {
    for (auto& w : w_) w.setZero();
    for (auto& b : b_) b.setZero();
  }

 private:
  std::vector<int> sizes_;
  OutputActivation out_act_;
  std::vector<Eigen::MatrixXd> w_;
  std::vector<Eigen::VectorXd> b_;
};

inline void soft_update(Mlp& target, const Mlp& online, double tau) {
  target.soft_update_from(online, tau);
}

}  // namespace lser
