#pragma once

#include <vector>

namespace qbplab {

// Sorted sample of one biomarker within one class. Immutable; quantile and
// distribution-function queries are pure.
class EmpiricalDistribution {
 public:
  // Takes the raw observations, sorts them. Throws on empty or NaN input.
  explicit EmpiricalDistribution(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& sorted_values() const { return values_; }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }

  // Quantile by linear interpolation of order statistics at rank
  // h = (n - 1) p + 1: the common default in statistical software,
  // continuous in p. p = 0 gives the minimum, p = 1 the maximum.
  double quantile(double p) const;

  // Quantile as the order statistic x_(ceil(n p)) (inverse of the ECDF).
  // Unlike the interpolated version this commutes exactly with strictly
  // increasing transformations of the data, which makes scores built on it
  // invariant under monotone re-expression of a biomarker.
  double quantile_lower(double p) const;

  // Fraction of observations <= x; right-continuous, counts ties with
  // multiplicity.
  double ecdf(double x) const;

 private:
  std::vector<double> values_;
};

}  // namespace qbplab
