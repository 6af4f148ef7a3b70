// Command-line front end for the LSER training harness.
//
// Subcommands: train, compare, sweep-hash, sweep-eps, bench, validate-lsh.
// Exit codes: 0 success, 1 invalid configuration or I/O failure,
// 2 validate-lsh deviation above tolerance.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "lser/format.hpp"
#include "lser/harness/bench.hpp"
#include "lser/harness/experiment.hpp"
#include "lser/harness/metrics.hpp"
#include "lser/harness/runner.hpp"
#include "lser/replay/lser_buffer.hpp"

namespace {

struct OutStream {
  std::ofstream file;
  std::ostream* os = &std::cout;
};

OutStream open_out(const std::string& path) {
  OutStream out;
  if (path != "-") {
    out.file.open(path, std::ios::binary | std::ios::trunc);
    if (!out.file) throw std::runtime_error("cannot open output file '" + path + "'");
    out.os = &out.file;
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Mirrors the ExperimentConfig fields onto CLI flags. Values from --config
// are applied first, explicit flags override them.
struct ConfigFlags {
  std::string config_path;
  std::string variant;
  std::uint64_t seed = 0;
  int episodes = 0;
  std::uint64_t capacity = 0;
  int hash_bits = 0;
  double eps_max = 0.0;
  int batch_size = 0;
  int warmup = 0;
  double gamma = 0.0, tau = 0.0, actor_lr = 0.0, critic_lr = 0.0;
  double per_alpha = 0.0, per_beta = 0.0, per_eps = 0.0;
  double ou_theta = 0.0, ou_sigma = 0.0, ou_dt = 0.0;
  double intervention_tr = 0.0;
  int env_interest_dim = 0;
  double env_kappa = 0.0, env_drift = 0.0, env_obs_noise = 0.0;
  int env_max_steps = 0, env_patience = 0;
  std::uint64_t env_seed = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "flat key=value config file");
    cmd->add_option("--variant", variant, "lser|lser_p|lser_s|uniform|per");
    cmd->add_option("--seed", seed, "root random seed");
    cmd->add_option("--episodes", episodes, "training episodes");
    cmd->add_option("--capacity", capacity, "replay buffer capacity");
    cmd->add_option("--hash-bits", hash_bits, "hyperplane count n_h");
    cmd->add_option("--eps-max", eps_max, "greedy sampling threshold");
    cmd->add_option("--batch-size", batch_size, "update batch size N");
    cmd->add_option("--warmup", warmup, "transitions before first update");
    cmd->add_option("--gamma", gamma, "discount factor");
    cmd->add_option("--tau", tau, "target soft-update rate");
    cmd->add_option("--actor-lr", actor_lr, "actor step size");
    cmd->add_option("--critic-lr", critic_lr, "critic step size");
    cmd->add_option("--per-alpha", per_alpha, "PER priority exponent");
    cmd->add_option("--per-beta", per_beta, "PER IS exponent");
    cmd->add_option("--per-eps", per_eps, "PER priority floor");
    cmd->add_option("--ou-theta", ou_theta, "OU mean-reversion rate");
    cmd->add_option("--ou-sigma", ou_sigma, "OU noise scale");
    cmd->add_option("--ou-dt", ou_dt, "OU time step");
    cmd->add_option("--intervention-tr", intervention_tr,
                    "stop exploration above this 20-episode mean CTR");
    cmd->add_option("--env-interest-dim", env_interest_dim, "user interest dimension");
    cmd->add_option("--env-kappa", env_kappa, "click sharpness");
    cmd->add_option("--env-drift", env_drift, "interest drift rate");
    cmd->add_option("--env-obs-noise", env_obs_noise, "observation noise scale");
    cmd->add_option("--env-max-steps", env_max_steps, "episode length cap");
    cmd->add_option("--env-patience", env_patience, "consecutive non-click limit");
    cmd->add_option("--env-seed", env_seed, "environment seed override (0 = derive)");
  }

  lser::ExperimentConfig build(const CLI::App* cmd) const {
    lser::ExperimentConfig cfg;
    if (cmd->count("--config")) cfg = lser::ExperimentConfig::parse(read_file(config_path));
    if (cmd->count("--variant")) cfg.variant = lser::parse_variant(variant);
    if (cmd->count("--seed")) cfg.seed = seed;
    if (cmd->count("--episodes")) cfg.episodes = episodes;
    if (cmd->count("--capacity")) cfg.buffer_capacity = capacity;
    if (cmd->count("--hash-bits")) cfg.hash_bits = hash_bits;
    if (cmd->count("--eps-max")) cfg.eps_max = eps_max;
    if (cmd->count("--batch-size")) cfg.batch_size = batch_size;
    if (cmd->count("--warmup")) cfg.warmup = warmup;
    if (cmd->count("--gamma")) cfg.gamma = gamma;
    if (cmd->count("--tau")) cfg.tau = tau;
    if (cmd->count("--actor-lr")) cfg.actor_lr = actor_lr;
    if (cmd->count("--critic-lr")) cfg.critic_lr = critic_lr;
    if (cmd->count("--per-alpha")) cfg.per_alpha = per_alpha;
    if (cmd->count("--per-beta")) cfg.per_beta = per_beta;
    if (cmd->count("--per-eps")) cfg.per_eps = per_eps;
    if (cmd->count("--ou-theta")) cfg.ou_theta = ou_theta;
    if (cmd->count("--ou-sigma")) cfg.ou_sigma = ou_sigma;
    if (cmd->count("--ou-dt")) cfg.ou_dt = ou_dt;
    if (cmd->count("--intervention-tr")) cfg.intervention_tr = intervention_tr;
    if (cmd->count("--env-interest-dim")) cfg.env.interest_dim = env_interest_dim;
    if (cmd->count("--env-kappa")) cfg.env.kappa = env_kappa;
    if (cmd->count("--env-drift")) cfg.env.drift = env_drift;
    if (cmd->count("--env-obs-noise")) cfg.env.obs_noise = env_obs_noise;
    if (cmd->count("--env-max-steps")) cfg.env.max_steps = env_max_steps;
    if (cmd->count("--env-patience")) cfg.env.patience = env_patience;
    if (cmd->count("--env-seed")) cfg.env.seed = env_seed;
    cfg.validate();
    return cfg;
  }
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(lser::parse_u64(item));
  }
  if (out.empty()) throw std::invalid_argument("empty seed list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(static_cast<int>(lser::parse_int(item)));
  }
  if (out.empty()) throw std::invalid_argument("empty value list");
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(static_cast<std::size_t>(lser::parse_int(item)));
  }
  if (out.empty()) throw std::invalid_argument("empty size list");
  return out;
}

int run_train(const ConfigFlags& flags, const CLI::App* cmd, const std::string& out_path,
              bool timing, const std::string& checkpoint_path,
              const std::string& dump_buffer_path) {
  const lser::ExperimentConfig cfg = flags.build(cmd);
  lser::TrainResult result;
  if (checkpoint_path.empty() && dump_buffer_path.empty()) {
    result = lser::run_training(cfg, timing);
  } else {
    const int last = cfg.episodes - 1;
    result = lser::run_training_hooked(
        cfg, timing,
        [&](lser::ClickEnv&, lser::DdpgAgent& agent, lser::ReplayBuffer& buffer, int ep) {
          if (ep != last) return;
          if (!checkpoint_path.empty()) {
            std::ofstream os(checkpoint_path, std::ios::binary | std::ios::trunc);
            if (!os) throw std::runtime_error("cannot open checkpoint file");
            agent.save(os);
          }
          if (!dump_buffer_path.empty()) {
            auto* lb = dynamic_cast<lser::LserBuffer*>(&buffer);
            if (lb == nullptr) {
              std::cerr << "note: --dump-buffer applies to the lser variant only\n";
            } else {
              std::ofstream os(dump_buffer_path, std::ios::binary | std::ios::trunc);
              if (!os) throw std::runtime_error("cannot open buffer dump file");
              lb->dump_csv(os);
            }
          }
        });
  }
  OutStream out = open_out(out_path);
  lser::write_metrics_csv(*out.os, result.rows);
  if (result.exploration_stopped_at) {
    std::cerr << "exploration stopped at episode " << *result.exploration_stopped_at << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locality-sensitive experience replay training harness"};
  app.require_subcommand(1);

  std::string out_path = "-";
  const auto add_out = [&out_path](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "CSV destination ('-' for stdout)")
        ->capture_default_str();
  };

  // --- train ---
  auto* train = app.add_subcommand("train", "run one training arm");
  add_out(train);
  ConfigFlags train_flags;
  train_flags.attach(train);
  bool train_timing = false;
  std::string checkpoint_path;
  std::string dump_buffer_path;
  train->add_flag("--timing", train_timing,
                  "record real per-episode wall clock (output no longer byte-reproducible)");
  train->add_option("--checkpoint", checkpoint_path, "write agent checkpoint here when done");
  train->add_option("--dump-buffer", dump_buffer_path,
                    "write the final replay buffer contents as CSV (lser variant)");

  // --- compare ---
  auto* compare = app.add_subcommand("compare", "paired comparison across variants");
  add_out(compare);
  ConfigFlags compare_flags;
  compare_flags.attach(compare);
  std::string compare_variants = "lser,uniform";
  std::string compare_seeds = "1,2,3,4,5";
  bool compare_timing = false;
  compare->add_option("--variants", compare_variants, "comma list of variants")
      ->capture_default_str();
  compare->add_option("--seeds", compare_seeds, "comma list of seeds")->capture_default_str();
  compare->add_flag("--timing", compare_timing, "record real per-episode wall clock");

  // --- sweep-hash ---
  auto* sweep_hash = app.add_subcommand("sweep-hash", "sweep the hyperplane count");
  add_out(sweep_hash);
  ConfigFlags hash_flags;
  hash_flags.attach(sweep_hash);
  std::string hash_values = "4,8,12,16,20,32";
  std::string hash_seeds = "1";
  sweep_hash->add_option("--values", hash_values, "comma list of n_h values")
      ->capture_default_str();
  sweep_hash->add_option("--seeds", hash_seeds, "comma list of seeds")->capture_default_str();

  // --- sweep-eps ---
  auto* sweep_eps = app.add_subcommand("sweep-eps", "sweep eps_max over {0, 0.9, 0.99, 1}");
  add_out(sweep_eps);
  ConfigFlags eps_flags;
  eps_flags.attach(sweep_eps);
  std::string eps_seeds = "1";
  sweep_eps->add_option("--seeds", eps_seeds, "comma list of seeds")->capture_default_str();

  // --- bench ---
  auto* bench = app.add_subcommand("bench", "replay-buffer micro-benchmarks");
  add_out(bench);
  std::string bench_sizes = "10000,31623,100000";
  lser::BenchOptions bench_opt;
  bench->add_option("--sizes", bench_sizes, "ascending comma list of total sizes")
      ->capture_default_str();
  bench->add_option("--bucket-size", bench_opt.bucket_size, "target bucket size")
      ->capture_default_str();
  bench->add_option("--batch", bench_opt.batch, "sample batch size")->capture_default_str();
  bench->add_option("--ops", bench_opt.ops, "timed operations per point")->capture_default_str();
  bench->add_option("--hash-bits", bench_opt.hash_bits, "hyperplane count")
      ->capture_default_str();
  bench->add_option("--seed", bench_opt.seed, "benchmark seed")->capture_default_str();

  // --- validate-lsh ---
  auto* validate = app.add_subcommand("validate-lsh", "check the collision law 1 - theta/pi");
  add_out(validate);
  int lsh_trials = 10000;
  int lsh_dim = 8;
  std::uint64_t lsh_seed = 1;
  validate->add_option("--trials", lsh_trials, "trials per angle (>= 1000)")
      ->capture_default_str();
  validate->add_option("--dim", lsh_dim, "vector dimension")->capture_default_str();
  validate->add_option("--seed", lsh_seed, "random seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      return run_train(train_flags, train, out_path, train_timing, checkpoint_path,
                       dump_buffer_path);
    }

    if (compare->parsed()) {
      const lser::ExperimentConfig cfg = compare_flags.build(compare);
      std::vector<lser::Variant> variants;
      {
        std::stringstream ss(compare_variants);
        std::string item;
        while (std::getline(ss, item, ',')) {
          if (!item.empty()) variants.push_back(lser::parse_variant(item));
        }
      }
      const auto seeds = parse_seed_list(compare_seeds);
      const lser::ComparisonResult result =
          lser::run_variant_comparison(cfg, variants, seeds, compare_timing);
      OutStream out = open_out(out_path);
      lser::write_metrics_csv(*out.os, result.rows);
      for (const auto& s : result.summaries) {
        std::cerr << lser::variant_label(s.variant) << ": final-100 CTR "
                  << lser::fmt_double(s.final_ctr_mean) << " +/- "
                  << lser::fmt_double(s.final_ctr_ci95) << " (95% CI, " << seeds.size()
                  << " seeds)\n";
      }
      return 0;
    }

    if (sweep_hash->parsed()) {
      const lser::ExperimentConfig cfg = hash_flags.build(sweep_hash);
      const auto rows =
          lser::run_hyperplane_sweep(cfg, parse_int_list(hash_values), parse_seed_list(hash_seeds));
      OutStream out = open_out(out_path);
      *out.os << "n_h,final_ctr_mean,final_ctr_ci95,bucket_count\n";
      for (const auto& r : rows) {
        *out.os << r.hash_bits << ',' << lser::fmt_double(r.final_ctr_mean) << ','
                << lser::fmt_double(r.final_ctr_ci95) << ',' << r.bucket_count << '\n';
      }
      return 0;
    }

    if (sweep_eps->parsed()) {
      const lser::ExperimentConfig cfg = eps_flags.build(sweep_eps);
      const auto rows = lser::run_epsilon_sweep(cfg, parse_seed_list(eps_seeds));
      OutStream out = open_out(out_path);
      *out.os << "eps_max,final_ctr_mean,final_ctr_ci95,greedy_fraction\n";
      for (const auto& r : rows) {
        *out.os << lser::fmt_double(r.eps_max) << ',' << lser::fmt_double(r.final_ctr_mean) << ','
                << lser::fmt_double(r.final_ctr_ci95) << ','
                << lser::fmt_double(r.greedy_fraction) << '\n';
      }
      return 0;
    }

    if (bench->parsed()) {
      bench_opt.sizes = parse_size_list(bench_sizes);
      const auto rows = lser::bench_buffers(bench_opt);
      OutStream out = open_out(out_path);
      *out.os << "structure,total_size,op,median_ns,ops\n";
      for (const auto& r : rows) {
        *out.os << r.structure << ',' << r.total_size << ',' << r.op << ','
                << lser::fmt_double(r.median_ns) << ',' << r.ops << '\n';
      }
      return 0;
    }

    if (validate->parsed()) {
      const auto report = lser::validate_lsh(lsh_trials, lsh_dim, lsh_seed);
      OutStream out = open_out(out_path);
      *out.os << "angle_rad,expected,empirical,deviation\n";
      for (const auto& r : report.rows) {
        *out.os << lser::fmt_double(r.angle) << ',' << lser::fmt_double(r.expected) << ','
                << lser::fmt_double(r.empirical) << ',' << lser::fmt_double(r.deviation) << '\n';
      }
      std::cerr << (report.pass ? "collision law holds within 0.02\n"
                                : "collision law deviation above 0.02\n");
      return report.pass ? 0 : 2;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
