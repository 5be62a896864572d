#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <cstdint>
#include <vector>

#include "mbt/common/error.hpp"

namespace mbt::bench {

struct ChiSquare {
  double statistic = 0;
  std::size_t dof = 0;
  double p_value = 1;

  bool passes(double alpha) const { return p_value >= alpha; }
};

// Goodness of fit of `counts` against shares proportional to `weights`.
inline ChiSquare chi_square_fit(const std::vector<std::uint64_t>& counts, const std::vector<std::uint64_t>& weights) {
  if (counts.size() != weights.size() || counts.size() < 2) {
    throw Error(ErrorKind::kParameter, "chi-square needs matching counts and weights for 2+ cells");
  }
  std::uint64_t n = 0, w = 0;
  for (auto c : counts) n += c;
  for (auto x : weights) {
    if (x == 0) throw Error(ErrorKind::kParameter, "zero weight");
    w += x;
  }
  ChiSquare out;
  out.dof = counts.size() - 1;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = static_cast<double>(n) * static_cast<double>(weights[i]) / static_cast<double>(w);
    const double diff = static_cast<double>(counts[i]) - expected;
    out.statistic += diff * diff / expected;
  }
  boost::math::chi_squared dist(static_cast<double>(out.dof));
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

}  // namespace mbt::bench
