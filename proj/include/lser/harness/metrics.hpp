#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "lser/format.hpp"

namespace lser {

// One CSV row per finished episode.
struct EpisodeMetrics {
  std::string variant;
  std::uint64_t seed = 0;
  int episode = 0;
  double ctr = 0.0;
  double cum_reward = 0.0;
  std::size_t buffer_size = 0;
  double wallclock_ms = 0.0;
};

inline constexpr const char* kMetricsCsvHeader =
    "variant,seed,episode,ctr,cum_reward,buffer_size,wallclock_ms";

inline void write_metrics_csv(std::ostream& os, const std::vector<EpisodeMetrics>& rows) {
  os << kMetricsCsvHeader << '\n';
  for (const EpisodeMetrics& r : rows) {
    os << r.variant << ',' << r.seed << ',' << r.episode << ',' << fmt_double(r.ctr) << ','
       << fmt_double(r.cum_reward) << ',' << r.buffer_size << ',' << fmt_double(r.wallclock_ms)
       << '\n';
  }
}

}  // namespace lser
