#include "qbplab/quantiles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qbplab {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) {
    throw std::invalid_argument("empirical distribution needs observations");
  }
  for (double v : values_) {
    if (std::isnan(v)) {
      throw std::invalid_argument(
          "empirical distribution does not accept missing values");
    }
  }
  std::sort(values_.begin(), values_.end());
}

double EmpiricalDistribution::quantile(double p) const {
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("quantile proportion outside [0, 1]");
  }
  const std::size_t n = values_.size();
  const double rank = static_cast<double>(n - 1) * p;  // 0-based
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  const double weight = rank - static_cast<double>(lo);
  if (lo + 1 >= n || weight == 0.0) {
    return values_[std::min(lo, n - 1)];
  }
  return values_[lo] + weight * (values_[lo + 1] - values_[lo]);
}

double EmpiricalDistribution::quantile_lower(double p) const {
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("quantile proportion outside [0, 1]");
  }
  const std::size_t n = values_.size();
  if (p == 0.0) {
    return values_.front();
  }
  // ceil(n p), guarded against ties-of-rounding like 100.0000000000001.
  const double h = static_cast<double>(n) * p;
  std::size_t rank = static_cast<std::size_t>(std::ceil(h - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return values_[rank - 1];
}

double EmpiricalDistribution::ecdf(double x) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), x);
  return static_cast<double>(it - values_.begin()) /
         static_cast<double>(values_.size());
}

}  // namespace qbplab
