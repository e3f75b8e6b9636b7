#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qbplab/quantiles.hpp"
#include "qbplab/rng.hpp"

using namespace qbplab;

namespace {

EmpiricalDistribution one_to_ten() {
  return EmpiricalDistribution({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
}

}  // namespace

TEST_CASE("interpolated quantile follows the rank-interpolation rule") {
  const auto d = one_to_ten();
  CHECK(d.quantile(0.0) == 1.0);
  CHECK(d.quantile(1.0) == 10.0);
  // rank h = (n-1)p + 1: p=0.5 -> h=5.5, p=0.95 -> h=9.55
  CHECK(d.quantile(0.5) == doctest::Approx(5.5));
  CHECK(d.quantile(0.95) == doctest::Approx(9.55));
  CHECK_THROWS_AS(d.quantile(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(d.quantile(1.1), std::invalid_argument);
}

TEST_CASE("order-statistic quantile returns sample values") {
  const auto d = one_to_ten();
  CHECK(d.quantile_lower(0.0) == 1.0);
  CHECK(d.quantile_lower(1.0) == 10.0);
  CHECK(d.quantile_lower(0.1) == 1.0);   // ceil(10 * 0.1) = 1
  CHECK(d.quantile_lower(0.25) == 3.0);  // ceil(2.5) = 3
  CHECK(d.quantile_lower(0.5) == 5.0);
}

TEST_CASE("ecdf counts ties with multiplicity and is right continuous") {
  const EmpiricalDistribution d({1, 2, 3, 4});
  CHECK(d.ecdf(2.0) == doctest::Approx(0.5));
  CHECK(d.ecdf(0.0) == 0.0);
  CHECK(d.ecdf(4.0) == 1.0);
  CHECK(d.ecdf(2.5) == doctest::Approx(0.5));
  const EmpiricalDistribution ties({1, 2, 2, 2, 3});
  CHECK(ties.ecdf(2.0) == doctest::Approx(0.8));
}

TEST_CASE("empirical distribution rejects empty and missing input") {
  CHECK_THROWS_AS(EmpiricalDistribution({}), std::invalid_argument);
  CHECK_THROWS_AS(
      EmpiricalDistribution({1.0, std::nan("")}), std::invalid_argument);
}

TEST_CASE("quantiles are monotone in p") {
  RngStream rng(42);
  for (int round = 0; round < 20; ++round) {
    std::vector<double> values(30 + rng.bounded(50));
    for (auto& v : values) v = 5.0 * rng.normal();
    const EmpiricalDistribution d(std::move(values));
    for (int trial = 0; trial < 50; ++trial) {
      double p1 = rng.uniform();
      double p2 = rng.uniform();
      if (p1 > p2) std::swap(p1, p2);
      CHECK(d.quantile(p1) <= d.quantile(p2));
      CHECK(d.quantile_lower(p1) <= d.quantile_lower(p2));
    }
  }
}

TEST_CASE("ecdf at a quantile nearly recovers the proportion") {
  RngStream rng(7);
  for (int round = 0; round < 20; ++round) {
    std::vector<double> values(20 + rng.bounded(80));
    for (auto& v : values) v = rng.normal();
    const double n = static_cast<double>(values.size());
    const EmpiricalDistribution d(std::move(values));
    for (int trial = 0; trial < 25; ++trial) {
      const double p = rng.uniform();
      CHECK(d.ecdf(d.quantile(p)) >= p - 1.0 / n - 1e-12);
      CHECK(d.ecdf(d.quantile_lower(p)) >= p - 1e-12);
    }
  }
}

TEST_CASE("ecdf is nondecreasing and bounded") {
  RngStream rng(11);
  std::vector<double> values(60);
  for (auto& v : values) v = rng.normal();
  const EmpiricalDistribution d(std::move(values));
  double previous = -1.0;
  for (double x = -4.0; x <= 4.0; x += 0.05) {
    const double f = d.ecdf(x);
    CHECK(f >= previous);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    previous = f;
  }
}
