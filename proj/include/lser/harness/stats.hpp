#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace lser {

inline double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean_of: empty");
  double s = 0.0;
  for (const double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (const double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

// Half-width of the two-sided 95% confidence interval for the mean,
// Student t with n-1 degrees of freedom. Zero when n < 2.
inline double ci95_half_width(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const boost::math::students_t dist(static_cast<double>(xs.size() - 1));
  const double t = boost::math::quantile(dist, 0.975);
  return t * std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

// p-value of the chi-square goodness-of-fit test of `counts` against a
// uniform distribution over the categories.
inline double chi_square_uniform_pvalue(const std::vector<std::size_t>& counts) {
  if (counts.size() < 2) throw std::invalid_argument("chi_square: need >= 2 categories");
  double total = 0.0;
  for (const std::size_t c : counts) total += static_cast<double>(c);
  if (total == 0.0) throw std::invalid_argument("chi_square: no observations");
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (const std::size_t c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace lser
