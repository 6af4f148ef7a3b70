#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lser/env/click_env.hpp"
#include "lser/format.hpp"

namespace lser {

enum class Variant { lser, lser_p, lser_s, uniform, per };

inline std::string variant_label(Variant v) {
  switch (v) {
    case Variant::lser: return "lser";
    case Variant::lser_p: return "lser_p";
    case Variant::lser_s: return "lser_s";
    case Variant::uniform: return "uniform";
    case Variant::per: return "per";
  }
  throw std::invalid_argument("variant_label: unknown variant");
}

inline Variant parse_variant(std::string_view label) {
  if (label == "lser") return Variant::lser;
  if (label == "lser_p") return Variant::lser_p;
  if (label == "lser_s") return Variant::lser_s;
  if (label == "uniform") return Variant::uniform;
  if (label == "per") return Variant::per;
  throw std::invalid_argument("parse_variant: unknown variant '" + std::string(label) + "'");
}

inline bool is_bucketed(Variant v) {
  return v == Variant::lser || v == Variant::lser_p || v == Variant::lser_s;
}

// Everything one training arm needs. Serializes to a flat key=value file;
// parse(serialize(cfg)) reproduces the config exactly.
struct ExperimentConfig {
  Variant variant = Variant::lser;
  std::uint64_t seed = 1;
  int episodes = 1000;
  std::size_t buffer_capacity = 10000;
  int hash_bits = 3;        // n_h, lser variants only
  double eps_max = 0.0;     // greedy-sampling threshold, lser variants only
  int batch_size = 64;      // N
  int warmup = 640;         // transitions stored before the first update
  double gamma = 0.99;
  double tau = 0.001;
  double actor_lr = 3e-3;
  double critic_lr = 1e-1;
  double per_alpha = 0.6;
  double per_beta = 0.4;
  double per_eps = 0.01;
  double ou_theta = 0.15;
  double ou_sigma = 0.2;
  double ou_dt = 1.0;
  std::optional<double> intervention_tr;  // stop exploring above this CTR
  EnvConfig env;

  void validate() const {
    if (episodes < 0) throw std::invalid_argument("config: episodes must be >= 0");
    if (buffer_capacity < 1) throw std::invalid_argument("config: buffer_capacity must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (warmup < 1) throw std::invalid_argument("config: warmup must be >= 1");
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("config: gamma must lie in [0, 1]");
    if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("config: tau must lie in (0, 1]");
    if (actor_lr <= 0.0 || critic_lr <= 0.0) {
      throw std::invalid_argument("config: learning rates must be > 0");
    }
    if (is_bucketed(variant)) {
      if (hash_bits < 1) throw std::invalid_argument("config: hash_bits must be >= 1");
      if (eps_max < 0.0 || eps_max > 1.0) {
        throw std::invalid_argument("config: eps_max must lie in [0, 1]");
      }
    }
    if (variant == Variant::per) {
      if (per_alpha < 0.0) throw std::invalid_argument("config: per_alpha must be >= 0");
      if (per_eps <= 0.0) throw std::invalid_argument("config: per_eps must be > 0");
    }
    if (intervention_tr && (*intervention_tr < 0.0 || *intervention_tr > 1.0)) {
      throw std::invalid_argument("config: intervention_tr must lie in [0, 1]");
    }
    env.validate();
  }

  std::string serialize() const {
    std::ostringstream os;
    os << "variant=" << variant_label(variant) << '\n';
    os << "seed=" << seed << '\n';
    os << "episodes=" << episodes << '\n';
    os << "buffer_capacity=" << buffer_capacity << '\n';
    os << "hash_bits=" << hash_bits << '\n';
    os << "eps_max=" << fmt_double(eps_max) << '\n';
    os << "batch_size=" << batch_size << '\n';
    os << "warmup=" << warmup << '\n';
    os << "gamma=" << fmt_double(gamma) << '\n';
    os << "tau=" << fmt_double(tau) << '\n';
    os << "actor_lr=" << fmt_double(actor_lr) << '\n';
    os << "critic_lr=" << fmt_double(critic_lr) << '\n';
    os << "per_alpha=" << fmt_double(per_alpha) << '\n';
    os << "per_beta=" << fmt_double(per_beta) << '\n';
    os << "per_eps=" << fmt_double(per_eps) << '\n';
    os << "ou_theta=" << fmt_double(ou_theta) << '\n';
    os << "ou_sigma=" << fmt_double(ou_sigma) << '\n';
    os << "ou_dt=" << fmt_double(ou_dt) << '\n';
    if (intervention_tr) os << "intervention_tr=" << fmt_double(*intervention_tr) << '\n';
    os << "env.interest_dim=" << env.interest_dim << '\n';
    os << "env.kappa=" << fmt_double(env.kappa) << '\n';
    os << "env.drift=" << fmt_double(env.drift) << '\n';
    os << "env.obs_noise=" << fmt_double(env.obs_noise) << '\n';
    os << "env.max_steps=" << env.max_steps << '\n';
    os << "env.patience=" << env.patience << '\n';
    os << "env.seed=" << env.seed << '\n';
    return os.str();
  }

  void apply_key_value(std::string_view key, std::string_view value) {
    if (key == "variant") variant = parse_variant(value);
    else if (key == "seed") seed = parse_u64(value);
    else if (key == "episodes") episodes = static_cast<int>(parse_int(value));
    else if (key == "buffer_capacity") buffer_capacity = static_cast<std::size_t>(parse_int(value));
    else if (key == "hash_bits") hash_bits = static_cast<int>(parse_int(value));
    else if (key == "eps_max") eps_max = parse_double(value);
    else if (key == "batch_size") batch_size = static_cast<int>(parse_int(value));
    else if (key == "warmup") warmup = static_cast<int>(parse_int(value));
    else if (key == "gamma") gamma = parse_double(value);
    else if (key == "tau") tau = parse_double(value);
    else if (key == "actor_lr") actor_lr = parse_double(value);
    else if (key == "critic_lr") critic_lr = parse_double(value);
    else if (key == "per_alpha") per_alpha = parse_double(value);
    else if (key == "per_beta") per_beta = parse_double(value);
    else if (key == "per_eps") per_eps = parse_double(value);
    else if (key == "ou_theta") ou_theta = parse_double(value);
    else if (key == "ou_sigma") ou_sigma = parse_double(value);
    else if (key == "ou_dt") ou_dt = parse_double(value);
    else if (key == "intervention_tr") intervention_tr = parse_double(value);
    else if (key == "env.interest_dim") env.interest_dim = static_cast<int>(parse_int(value));
    else if (key == "env.kappa") env.kappa = parse_double(value);
    else if (key == "env.drift") env.drift = parse_double(value);
    else if (key == "env.obs_noise") env.obs_noise = parse_double(value);
    else if (key == "env.max_steps") env.max_steps = static_cast<int>(parse_int(value));
    else if (key == "env.patience") env.patience = static_cast<int>(parse_int(value));
    else if (key == "env.seed") env.seed = parse_u64(value);
    else throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
  }

  static ExperimentConfig parse(std::string_view text) {
    ExperimentConfig cfg;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
      while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
      if (line.empty() || line.front() == '#') continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw std::invalid_argument("config: expected key=value, got '" + std::string(line) + "'");
      }
      cfg.apply_key_value(line.substr(0, eq), line.substr(eq + 1));
    }
    return cfg;
  }

  bool operator==(const ExperimentConfig& o) const {
    return serialize() == o.serialize();
  }
};

}  // namespace lser
