#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lser/agent/ddpg.hpp"
#include "lser/agent/ou_noise.hpp"
#include "lser/env/click_env.hpp"
#include "lser/harness/experiment.hpp"
#include "lser/harness/metrics.hpp"
#include "lser/harness/stats.hpp"
#include "lser/lsh.hpp"
#include "lser/replay/ablation_buffers.hpp"
#include "lser/replay/lser_buffer.hpp"
#include "lser/replay/per_buffer.hpp"
#include "lser/replay/uniform_buffer.hpp"

namespace lser {

namespace streams {
inline constexpr std::uint64_t kPlanes = 0x01;
inline constexpr std::uint64_t kBuffer = 0x02;
inline constexpr std::uint64_t kAgent = 0x03;
inline constexpr std::uint64_t kNoise = 0x04;
inline constexpr std::uint64_t kEnv = 0x05;
}  // namespace streams

inline std::unique_ptr<ReplayBuffer> make_buffer(const ExperimentConfig& cfg) {
  const std::uint64_t buf_seed = derive_seed(cfg.seed, streams::kBuffer);
  switch (cfg.variant) {
    case Variant::lser:
      return std::make_unique<LserBuffer>(
          cfg.buffer_capacity,
          make_hyperplanes(cfg.hash_bits, cfg.env.state_dim(),
                           derive_seed(cfg.seed, streams::kPlanes)),
          cfg.eps_max, buf_seed);
    case Variant::lser_p:
      return std::make_unique<FifoBucketBuffer>(
          cfg.buffer_capacity,
          make_hyperplanes(cfg.hash_bits, cfg.env.state_dim(),
                           derive_seed(cfg.seed, streams::kPlanes)),
          cfg.eps_max, buf_seed);
    case Variant::lser_s:
      return std::make_unique<BucketStoreUniformSampleBuffer>(
          cfg.buffer_capacity,
          make_hyperplanes(cfg.hash_bits, cfg.env.state_dim(),
                           derive_seed(cfg.seed, streams::kPlanes)),
          buf_seed);
    case Variant::uniform:
      return std::make_unique<UniformBuffer>(cfg.buffer_capacity, buf_seed);
    case Variant::per:
      return std::make_unique<PerBuffer>(cfg.buffer_capacity, cfg.per_alpha, cfg.per_beta,
                                         cfg.per_eps, buf_seed);
  }
  throw std::invalid_argument("make_buffer: unknown variant");
}

struct TrainResult {
  std::vector<EpisodeMetrics> rows;
  std::optional<int> exploration_stopped_at;
  SampleCounters counters;
  std::size_t final_buffer_size = 0;
  std::size_t final_bucket_count = 0;
};

// Runs one training arm. All random streams derive from cfg.seed; the
// environment stream in particular does not depend on the variant, so arms
// with equal seeds face identical user populations (paired comparison).
// wallclock_ms is recorded only when measure_time is set; it defaults to 0
// so that a seeded run always produces byte-identical CSV output.
template <class EpisodeHook>
TrainResult run_training_hooked(const ExperimentConfig& cfg, bool measure_time,
                                EpisodeHook&& hook) {
  cfg.validate();
  TrainResult result;

  EnvConfig env_cfg = cfg.env;
  if (env_cfg.seed == 0) env_cfg.seed = derive_seed(cfg.seed, streams::kEnv);
  ClickEnv env(env_cfg);

  DdpgConfig agent_cfg;
  agent_cfg.state_dim = env_cfg.state_dim();
  agent_cfg.action_dim = env_cfg.action_dim();
  agent_cfg.gamma = cfg.gamma;
  agent_cfg.tau = cfg.tau;
  agent_cfg.actor_lr = cfg.actor_lr;
  agent_cfg.critic_lr = cfg.critic_lr;
  agent_cfg.seed = derive_seed(cfg.seed, streams::kAgent);
  DdpgAgent agent(agent_cfg);

  OuNoise noise(env_cfg.action_dim(), cfg.ou_theta, cfg.ou_sigma, 0.0, cfg.ou_dt,
                derive_seed(cfg.seed, streams::kNoise));
  auto buffer = make_buffer(cfg);

  TrainStepOptions opt;
  opt.batch_size = static_cast<std::size_t>(cfg.batch_size);
  opt.warmup = static_cast<std::size_t>(cfg.warmup);
  opt.explore = true;

  const std::string label = variant_label(cfg.variant);
  std::deque<double> ctr_window;

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const auto t0 = std::chrono::steady_clock::now();
    Eigen::VectorXd state = env.reset();
    noise.reset();
    double clicks = 0.0;
    int steps = 0;
    while (true) {
      const TrainStepResult step = train_step(agent, *buffer, env, state, noise, opt);
      clicks += step.reward;
      ++steps;
      state = step.next_state;
      if (step.done) break;
    }
    const double ctr = clicks / static_cast<double>(steps);
    double ms = 0.0;
    if (measure_time) {
      ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
               .count();
    }
    result.rows.push_back(
        EpisodeMetrics{label, cfg.seed, ep, ctr, clicks, buffer->size(), ms});

    ctr_window.push_back(ctr);
    if (ctr_window.size() > 20) ctr_window.pop_front();
    if (cfg.intervention_tr && opt.explore && ctr_window.size() == 20) {
      double avg = 0.0;
      for (const double c : ctr_window) avg += c;
      avg /= 20.0;
      if (avg > *cfg.intervention_tr) {
        opt.explore = false;
        result.exploration_stopped_at = ep;
      }
    }
    hook(env, agent, *buffer, ep);
  }

  if (const SampleCounters* c = buffer->sample_counters()) result.counters = *c;
  result.final_buffer_size = buffer->size();
  result.final_bucket_count = buffer->stats().bucket_count;
  return result;
}

inline TrainResult run_training(const ExperimentConfig& cfg, bool measure_time = false) {
  return run_training_hooked(cfg, measure_time,
                             [](ClickEnv&, DdpgAgent&, ReplayBuffer&, int) {});
}

// Mean CTR over the last `window` episodes of one arm's rows.
inline double final_window_ctr(const std::vector<EpisodeMetrics>& rows, int window = 100) {
  if (rows.empty()) throw std::invalid_argument("final_window_ctr: no rows");
  const std::size_t n = rows.size();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(window), n);
  double s = 0.0;
  for (std::size_t i = n - k; i < n; ++i) s += rows[i].ctr;
  return s / static_cast<double>(k);
}

struct VariantSummary {
  Variant variant = Variant::lser;
  std::vector<double> final_ctr_per_seed;
  double final_ctr_mean = 0.0;
  double final_ctr_ci95 = 0.0;
};

struct ComparisonResult {
  std::vector<EpisodeMetrics> rows;
  std::vector<VariantSummary> summaries;
};

// One arm per (variant, seed), all paired through the shared seed list.
inline ComparisonResult run_variant_comparison(const ExperimentConfig& base,
                                               const std::vector<Variant>& variants,
                                               const std::vector<std::uint64_t>& seeds,
                                               bool measure_time = false) {
  if (variants.empty()) throw std::invalid_argument("run_variant_comparison: no variants");
  if (seeds.empty()) throw std::invalid_argument("run_variant_comparison: need >= 1 seed");
  ComparisonResult out;
  for (const Variant v : variants) {
    VariantSummary summary;
    summary.variant = v;
    for (const std::uint64_t seed : seeds) {
      ExperimentConfig cfg = base;
      cfg.variant = v;
      cfg.seed = seed;
      TrainResult r = run_training(cfg, measure_time);
      summary.final_ctr_per_seed.push_back(final_window_ctr(r.rows));
      for (auto& row : r.rows) out.rows.push_back(std::move(row));
    }
    summary.final_ctr_mean = mean_of(summary.final_ctr_per_seed);
    summary.final_ctr_ci95 = ci95_half_width(summary.final_ctr_per_seed);
    out.summaries.push_back(std::move(summary));
  }
  return out;
}

struct HashSweepRow {
  int hash_bits = 0;
  double final_ctr_mean = 0.0;
  double final_ctr_ci95 = 0.0;
  std::size_t bucket_count = 0;
};

inline std::vector<HashSweepRow> run_hyperplane_sweep(const ExperimentConfig& base,
                                                      const std::vector<int>& values,
                                                      const std::vector<std::uint64_t>& seeds) {
  if (values.empty()) throw std::invalid_argument("run_hyperplane_sweep: no values");
  if (seeds.empty()) throw std::invalid_argument("run_hyperplane_sweep: need >= 1 seed");
  std::vector<HashSweepRow> out;
  for (const int n_h : values) {
    HashSweepRow row;
    row.hash_bits = n_h;
    std::vector<double> finals;
    for (const std::uint64_t seed : seeds) {
      ExperimentConfig cfg = base;
      cfg.variant = Variant::lser;
      cfg.hash_bits = n_h;
      cfg.seed = seed;
      TrainResult r = run_training(cfg);
      finals.push_back(final_window_ctr(r.rows));
      row.bucket_count = std::max(row.bucket_count, r.final_bucket_count);
    }
    row.final_ctr_mean = mean_of(finals);
    row.final_ctr_ci95 = ci95_half_width(finals);
    out.push_back(row);
  }
  return out;
}

struct EpsilonSweepRow {
  double eps_max = 0.0;
  double final_ctr_mean = 0.0;
  double final_ctr_ci95 = 0.0;
  double greedy_fraction = 0.0;
};

inline const std::vector<double>& epsilon_sweep_values() {
  static const std::vector<double> values{0.0, 0.9, 0.99, 1.0};
  return values;
}

inline std::vector<EpsilonSweepRow> run_epsilon_sweep(const ExperimentConfig& base,
                                                      const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("run_epsilon_sweep: need >= 1 seed");
  std::vector<EpsilonSweepRow> out;
  for (const double eps : epsilon_sweep_values()) {
    EpsilonSweepRow row;
    row.eps_max = eps;
    std::vector<double> finals;
    std::uint64_t greedy = 0;
    std::uint64_t calls = 0;
    for (const std::uint64_t seed : seeds) {
      ExperimentConfig cfg = base;
      cfg.variant = Variant::lser;
      cfg.eps_max = eps;
      cfg.seed = seed;
      TrainResult r = run_training(cfg);
      finals.push_back(final_window_ctr(r.rows));
      greedy += r.counters.greedy_batches;
      calls += r.counters.sample_calls;
    }
    row.final_ctr_mean = mean_of(finals);
    row.final_ctr_ci95 = ci95_half_width(finals);
    row.greedy_fraction = calls ? static_cast<double>(greedy) / static_cast<double>(calls) : 0.0;
    out.push_back(row);
  }
  return out;
}

struct LshValidationRow {
  double angle = 0.0;
  double expected = 0.0;
  double empirical = 0.0;
  double deviation = 0.0;
};

struct LshValidationReport {
  std::vector<LshValidationRow> rows;
  bool pass = true;
};

inline const std::vector<double>& default_validation_angles() {
  static const std::vector<double> angles{0.0, std::numbers::pi / 6.0, std::numbers::pi / 3.0,
                                          std::numbers::pi / 2.0, 2.0 * std::numbers::pi / 3.0};
  return angles;
}

// Empirical check of the sign-projection collision law 1 - theta/pi. Each
// trial draws a fresh vector pair at the requested angle plus one random
// hyperplane, and counts whether the hash bits agree.
inline LshValidationReport validate_lsh(int trials, int dim, std::uint64_t seed,
                                        const std::vector<double>& angles =
                                            default_validation_angles(),
                                        double tolerance = 0.02) {
  if (trials < 1000) throw std::invalid_argument("validate_lsh: trials must be >= 1000");
  if (dim < 2) throw std::invalid_argument("validate_lsh: dim must be >= 2");
  LshValidationReport report;
  Rng rng(derive_seed(seed, 0x6c736876ull));
  for (const double theta : angles) {
    std::size_t collisions = 0;
    for (int t = 0; t < trials; ++t) {
      Eigen::VectorXd u(dim);
      for (int i = 0; i < dim; ++i) u(i) = rng.gaussian();
      u.normalize();
      Eigen::VectorXd w(dim);
      double wn = 0.0;
      do {
        for (int i = 0; i < dim; ++i) w(i) = rng.gaussian();
        w -= w.dot(u) * u;
        wn = w.norm();
      } while (wn < 1e-12);
      w /= wn;
      const Eigen::VectorXd v = std::cos(theta) * u + std::sin(theta) * w;
      Eigen::VectorXd plane(dim);
      for (int i = 0; i < dim; ++i) plane(i) = rng.gaussian();
      const bool bit_u = plane.dot(u) > 0.0;
      const bool bit_v = plane.dot(v) > 0.0;
      collisions += static_cast<std::size_t>(bit_u == bit_v);
    }
    LshValidationRow row;
    row.angle = theta;
    row.expected = 1.0 - theta / std::numbers::pi;
    row.empirical = static_cast<double>(collisions) / static_cast<double>(trials);
    row.deviation = std::abs(row.empirical - row.expected);
    if (row.deviation > tolerance) report.pass = false;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace lser
