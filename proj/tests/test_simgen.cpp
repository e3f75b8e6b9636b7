#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "qbplab/simgen.hpp"

using namespace qbplab;

namespace {

std::pair<double, double> class_mean_sd(const Dataset& ds, int label,
                                        Eigen::Index k) {
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    if (ds.labels()[static_cast<std::size_t>(i)] == label) {
      sum += ds.value(i, k);
      ++count;
    }
  }
  const double mean = sum / count;
  double ss = 0.0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    if (ds.labels()[static_cast<std::size_t>(i)] == label) {
      const double d = ds.value(i, k) - mean;
      ss += d * d;
    }
  }
  return {mean, std::sqrt(ss / (count - 1))};
}

}  // namespace

TEST_CASE("design table carries the expected structure") {
  const std::map<std::string, int> expected_relevant{
      {"1", 0},  {"2", 5},  {"3", 10}, {"4", 9},  {"5", 9},
      {"6a", 7}, {"6b", 7}, {"6c", 7}, {"7a", 9}, {"7b", 9},
      {"7c", 9}, {"8a", 14}, {"8b", 14}, {"8c", 14}};
  for (const auto& [id, count] : expected_relevant) {
    const SimDesign design = build_design(id);
    CHECK(design.markers.size() == 35);
    int relevant = 0;
    for (const auto& m : design.markers) relevant += m.relevant();
    CHECK(relevant == count);
  }
}

TEST_CASE("design 1 is fully null with n=100 and even classes") {
  const SimDesign design = build_design("1");
  CHECK(design.n == 100);
  CHECK(design.case_proportion == 0.5);
  for (const auto& m : design.markers) {
    CHECK(m.beta == 0.0);
    CHECK(m.nu == 0.0);
    CHECK(m.psi[0] == Transform::identity);
    CHECK(m.psi[1] == Transform::identity);
  }
}

TEST_CASE("unbalanced variants carry their own n and case share") {
  const SimDesign design = build_design("6c");
  CHECK(design.n == 250);
  CHECK(design.case_proportion == doctest::Approx(0.2));
  int relevant = 0;
  for (const auto& m : design.markers) relevant += m.relevant();
  CHECK(relevant == 7);
  for (const auto& m : design.markers) {
    CHECK(m.psi[0] == Transform::expo);
    CHECK(m.psi[1] == Transform::expo);
  }
  const SimDesign b = build_design("7b");
  CHECK(b.n == 400);
  CHECK(b.case_proportion == doctest::Approx(0.5));
}

TEST_CASE("scale-shift design leaves means alone") {
  const SimDesign design = build_design("4");
  const MarkerSim& marker4 = design.markers[3];  // biomarker 4
  CHECK(marker4.nu == doctest::Approx(-0.15));
  CHECK(marker4.beta == 0.0);
  CHECK(marker4.psi[0] == Transform::identity);
  const MarkerSim& marker1 = design.markers[0];
  CHECK(marker1.nu == 0.0);
}

TEST_CASE("mean-shift designs move the case mean by one latent sd") {
  const SimDesign design = build_design("2");
  const MarkerSim& shifted = design.markers[5];  // biomarker 6
  CHECK(shifted.beta == doctest::Approx(shifted.eta[0]));
  CHECK(design.markers[0].beta == 0.0);
  int shifted_count = 0;
  for (const auto& m : design.markers) shifted_count += m.beta != 0.0;
  CHECK(shifted_count == 5);
}

TEST_CASE("skewness design draws controls and cases from different families") {
  const SimDesign design = build_design("5");
  const MarkerSim& skewed = design.markers[3];  // biomarker 4
  CHECK(skewed.psi[0] == Transform::identity);
  CHECK(skewed.psi[1] == Transform::expo);
  CHECK(skewed.alpha[0] != skewed.alpha[1]);
  const MarkerSim& plain = design.markers[0];
  CHECK(plain.psi[0] == Transform::expo);
  CHECK(plain.psi[1] == Transform::expo);
  CHECK(plain.alpha[0] == plain.alpha[1]);
}

TEST_CASE("unknown design ids list the valid ones") {
  CHECK_THROWS_WITH_AS(build_design("9"), doctest::Contains("6a"),
                       std::invalid_argument);
}

TEST_CASE("scale shift applies to the correct class") {
  // nu = 0.15, eta = 2: case sd 1.7, control sd 2.3
  SimDesign design;
  design.id = "probe";
  design.n = 4000;
  design.case_proportion = 0.5;
  MarkerSim m;
  m.name = "m";
  m.alpha[0] = m.alpha[1] = 0.0;
  m.eta[0] = m.eta[1] = 2.0;
  m.nu = 0.15;
  design.markers.push_back(m);
  design.correlation = Eigen::MatrixXd::Identity(1, 1);

  RngStream rng(10);
  const auto [ds, mask] = sample_dataset(design, rng);
  CHECK(mask.count() == 1);
  const auto [case_mean, case_sd] = class_mean_sd(ds, 1, 0);
  const auto [control_mean, control_sd] = class_mean_sd(ds, 0, 0);
  CHECK(case_sd == doctest::Approx(1.7).epsilon(0.05));
  CHECK(control_sd == doctest::Approx(2.3).epsilon(0.05));
  CHECK(std::abs(case_mean) < 0.15);
  CHECK(std::abs(control_mean) < 0.15);
}

TEST_CASE("sampling is bitwise deterministic for a seed") {
  const SimDesign design = build_design("6a");
  RngStream a(99);
  RngStream b(99);
  const auto [ds_a, mask_a] = sample_dataset(design, a);
  const auto [ds_b, mask_b] = sample_dataset(design, b);
  CHECK(ds_a == ds_b);
  CHECK(mask_a.relevant == mask_b.relevant);
  RngStream c(100);
  const auto [ds_c, mask_c] = sample_dataset(design, c);
  CHECK_FALSE(ds_a == ds_c);
}

TEST_CASE("case count is the floor of the case share") {
  const SimDesign design = build_design("6c");  // n=250, phi=1/5
  RngStream rng(3);
  const auto [ds, mask] = sample_dataset(design, rng);
  CHECK(ds.count_label(1) == 50);
  CHECK(ds.count_label(0) == 200);
}

TEST_CASE("null design classes share their distribution") {
  const SimDesign design = build_design("1").with_n(5000);
  RngStream rng(17);
  const auto [ds, mask] = sample_dataset(design, rng);
  for (Eigen::Index k : {0, 7, 19, 34}) {
    const auto [case_mean, case_sd] = class_mean_sd(ds, 1, k);
    const auto [ctrl_mean, ctrl_sd] = class_mean_sd(ds, 0, k);
    const double pooled_se =
        std::sqrt(case_sd * case_sd / 2500.0 + ctrl_sd * ctrl_sd / 2500.0);
    CHECK(std::abs(case_mean - ctrl_mean) < 4.0 * pooled_se);
  }
}

TEST_CASE("log-normal markers are positive with the right log-mean") {
  const SimDesign design = build_design("6a").with_n(2000);
  RngStream rng(23);
  const auto [ds, mask] = sample_dataset(design, rng);
  double log_sum = 0.0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    REQUIRE(ds.value(i, 0) > 0.0);
    log_sum += std::log(ds.value(i, 0));
  }
  // biomarker 1 has latent location 6.19 and scale 0.65
  const double log_mean = log_sum / 2000.0;
  const double se = 0.65 / std::sqrt(2000.0);
  CHECK(std::abs(log_mean - 6.19) < 3.0 * se);
}

TEST_CASE("negative nu inflates the case variance") {
  const SimDesign design = build_design("4").with_n(5000);
  RngStream rng(29);
  const auto [ds, mask] = sample_dataset(design, rng);
  for (std::size_t k = 0; k < design.markers.size(); ++k) {
    const double nu = design.markers[k].nu;
    if (nu == 0.0) continue;
    const auto [cm, case_sd] = class_mean_sd(ds, 1, static_cast<Eigen::Index>(k));
    const auto [km, ctrl_sd] = class_mean_sd(ds, 0, static_cast<Eigen::Index>(k));
    if (nu < 0.0) {
      CHECK(case_sd > ctrl_sd);
    } else {
      CHECK(case_sd < ctrl_sd);
    }
  }
}

TEST_CASE("correlation files are validated") {
  const auto path = (std::filesystem::temp_directory_path() /
                     "qbplab_corr.csv")
                        .string();
  SUBCASE("valid file loads") {
    std::ofstream(path) << "1,0.5\n0.5,1\n";
    const Eigen::MatrixXd m = load_correlation_csv(path, 2);
    CHECK(m(0, 1) == 0.5);
  }
  SUBCASE("asymmetry is rejected") {
    std::ofstream(path) << "1,0.5\n0.4,1\n";
    CHECK_THROWS_AS(load_correlation_csv(path, 2), std::runtime_error);
  }
  SUBCASE("off-unit diagonal is rejected") {
    std::ofstream(path) << "1,0\n0,0.9\n";
    CHECK_THROWS_AS(load_correlation_csv(path, 2), std::runtime_error);
  }
  SUBCASE("wrong size is rejected") {
    std::ofstream(path) << "1,0\n0,1\n";
    CHECK_THROWS_AS(load_correlation_csv(path, 3), std::runtime_error);
  }
  std::remove(path.c_str());
}

TEST_CASE("scale parameters outside the positivity region are rejected") {
  SimDesign design;
  design.id = "probe";
  design.n = 10;
  design.case_proportion = 0.5;
  MarkerSim m;
  m.name = "m";
  m.eta[0] = m.eta[1] = 1.0;
  m.nu = 0.6;  // would allow a nonpositive case scale
  design.markers.push_back(m);
  design.correlation = Eigen::MatrixXd::Identity(1, 1);
  RngStream rng(1);
  CHECK_THROWS_AS(sample_dataset(design, rng), std::invalid_argument);
  design.markers[0].nu = 0.4;
  design.markers[0].eta[1] = 0.0;
  CHECK_THROWS_AS(sample_dataset(design, rng), std::invalid_argument);
}

TEST_CASE("non positive definite correlation fails at sampling") {
  Eigen::MatrixXd bad = Eigen::MatrixXd::Constant(35, 35, -0.5);
  bad.diagonal().setOnes();
  const SimDesign design = build_design("1", bad);
  RngStream rng(1);
  CHECK_THROWS_AS(sample_dataset(design, rng), std::runtime_error);
}

TEST_CASE("correlated sampling respects the requested correlation") {
  Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(35, 35);
  corr(0, 1) = corr(1, 0) = 0.8;
  const SimDesign design = build_design("1", corr).with_n(4000);
  RngStream rng(31);
  const auto [ds, mask] = sample_dataset(design, rng);
  // biomarkers 1 and 2 are identity-transformed in design 1
  const Eigen::VectorXd a = ds.features().col(0);
  const Eigen::VectorXd b = ds.features().col(1);
  const double ma = a.mean();
  const double mb = b.mean();
  const double cov = ((a.array() - ma) * (b.array() - mb)).sum() / 3999.0;
  const double sa = std::sqrt((a.array() - ma).square().sum() / 3999.0);
  const double sb = std::sqrt((b.array() - mb).square().sum() / 3999.0);
  CHECK(cov / (sa * sb) == doctest::Approx(0.8).epsilon(0.05));
}
