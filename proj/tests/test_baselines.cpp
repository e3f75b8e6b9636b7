#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qbplab/classifier.hpp"
#include "qbplab/knn.hpp"
#include "qbplab/lda.hpp"
#include "qbplab/metrics.hpp"
#include "qbplab/pca.hpp"
#include "qbplab/pls.hpp"
#include "qbplab/rng.hpp"

using namespace qbplab;

namespace {

Dataset gaussian_data(RngStream& rng, int per_class, int r, double shift) {
  const int n = 2 * per_class;
  Eigen::MatrixXd x(n, r);
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::vector<std::string> names;
  for (int k = 0; k < r; ++k) names.push_back("m" + std::to_string(k));
  for (int i = 0; i < n; ++i) {
    const int y = i < per_class ? 0 : 1;
    labels[static_cast<std::size_t>(i)] = y;
    for (int k = 0; k < r; ++k) x(i, k) = rng.normal() + shift * y;
  }
  return Dataset(std::move(x), std::move(labels), std::move(names));
}

std::vector<std::size_t> ranking(const Eigen::VectorXd& scores) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) <
           scores(static_cast<Eigen::Index>(b));
  });
  return order;
}

}  // namespace

// --- PCA / PCLR ---

TEST_CASE("pca on collinear data puts all variance on one component") {
  Eigen::MatrixXd x(6, 2);
  for (int i = 0; i < 6; ++i) {
    x(i, 0) = i;
    x(i, 1) = 2.0 * i + 1.0;
  }
  const Dataset ds(x, {0, 1, 0, 1, 0, 1}, {"a", "b"});
  const PcaBasis basis = pca(ds);
  CHECK(basis.eigenvalues(1) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(basis.explained_variance_percent(1) == doctest::Approx(100.0));
}

TEST_CASE("pca with all components reconstructs the data") {
  RngStream rng(4);
  const Dataset ds = gaussian_data(rng, 30, 5, 0.5);
  const PcaBasis basis = pca(ds);
  const Eigen::MatrixXd scores = basis.scores(ds.features(), 5);
  const Eigen::MatrixXd reconstructed =
      (scores * basis.eigenvectors.transpose()).rowwise() +
      basis.center.transpose();
  CHECK((reconstructed - ds.features()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("pca score covariance is the diagonal of eigenvalues") {
  RngStream rng(14);
  const Dataset ds = gaussian_data(rng, 60, 4, 0.0);
  const PcaBasis basis = pca(ds);
  const Eigen::MatrixXd z = basis.scores(ds.features(), 4);
  const Eigen::MatrixXd centered = z.rowwise() - z.colwise().mean();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(ds.n() - 1);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const double expected = a == b ? basis.eigenvalues(a) : 0.0;
      CHECK(std::abs(cov(a, b) - expected) < 1e-8);
    }
  }
}

TEST_CASE("pca conserves total variance") {
  RngStream rng(21);
  const Dataset ds = gaussian_data(rng, 50, 6, 0.3);
  const PcaBasis basis = pca(ds);
  const Eigen::MatrixXd centered =
      ds.features().rowwise() - ds.features().colwise().mean();
  const double total =
      centered.array().square().sum() / static_cast<double>(ds.n() - 1);
  CHECK(std::abs(basis.eigenvalues.sum() - total) < 1e-8 * total);
}

TEST_CASE("pclr with every component matches plain logistic scores") {
  RngStream rng(33);
  const Dataset ds = gaussian_data(rng, 100, 4, 0.7);
  const PclrModel pclr = fit_pclr(ds, 4);
  const LogisticModel logit = fit_logistic(ds);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    CHECK(std::abs(pclr.score(ds.row(i)) - logit.score(ds.row(i))) < 1e-6);
  }
}

TEST_CASE("pclr scores are probabilities") {
  RngStream rng(6);
  const Dataset ds = gaussian_data(rng, 40, 3, 0.4);
  const PclrModel model = fit_pclr(ds, 2);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const double p = model.score(ds.row(i));
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
  CHECK_THROWS_AS(fit_pclr(ds, 0), std::invalid_argument);
  CHECK_THROWS_AS(fit_pclr(ds, 4), std::invalid_argument);
}

TEST_CASE("pclr on rank-one features equals univariate logistic on the line") {
  RngStream rng(8);
  Eigen::MatrixXd x(80, 2);
  std::vector<int> labels(80);
  for (int i = 0; i < 80; ++i) {
    const double t = rng.normal();
    x(i, 0) = t;
    x(i, 1) = -3.0 * t;  // exactly collinear
    labels[static_cast<std::size_t>(i)] =
        rng.uniform() < 1.0 / (1.0 + std::exp(-t)) ? 1 : 0;
  }
  labels[0] = 0;
  labels[1] = 1;
  const Dataset ds(x, labels, {"a", "b"});
  const PclrModel model = fit_pclr(ds, 1);
  // univariate logistic on the projection
  const PcaBasis basis = pca(ds);
  const Eigen::MatrixXd z = basis.scores(ds.features(), 1);
  const Dataset latent(z, ds.labels(), {"z"});
  const LogisticModel uni = fit_logistic(latent);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    CHECK(std::abs(model.score(ds.row(i)) - uni.score(z.row(i))) < 1e-10);
  }
}

// --- LDA ---

TEST_CASE("lda with mirrored classes puts the boundary through the origin") {
  // identical within-class scatter, means exactly +-mu, equal priors
  const Eigen::Vector2d mu(1.5, -0.5);
  Eigen::MatrixXd x(8, 2);
  const double pts[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  std::vector<int> labels(8);
  for (int j = 0; j < 4; ++j) {
    x(j, 0) = -mu(0) + pts[j][0];
    x(j, 1) = -mu(1) + pts[j][1];
    labels[static_cast<std::size_t>(j)] = 0;
    x(4 + j, 0) = mu(0) + pts[j][0];
    x(4 + j, 1) = mu(1) + pts[j][1];
    labels[static_cast<std::size_t>(4 + j)] = 1;
  }
  const LdaModel model = fit_lda(Dataset(x, labels, {"a", "b"}));
  CHECK(std::abs(model.score(Eigen::Vector2d(0, 0))) < 1e-10);
  // any point orthogonal to mu stays on the boundary
  const Eigen::Vector2d orthogonal(mu(1), -mu(0));
  CHECK(std::abs(model.score(2.7 * orthogonal)) < 1e-10);
  CHECK(model.score(mu) > 0.0);
  CHECK(model.score(-mu) < 0.0);
}

TEST_CASE("lda separates distant gaussians almost perfectly") {
  RngStream rng(55);
  const Dataset train = gaussian_data(rng, 1000, 4, 3.0);  // 6 sd distance
  const LdaModel model = fit_lda(train);
  const Dataset validation = gaussian_data(rng, 1000, 4, 3.0);
  Eigen::VectorXd scores(validation.n());
  for (Eigen::Index i = 0; i < validation.n(); ++i) {
    scores(i) = model.score(validation.row(i));
  }
  const double auc =
      roc_curve({scores.data(), static_cast<std::size_t>(scores.size())},
                validation.labels())
          .auc;
  CHECK(auc > 0.999);
}

TEST_CASE("lda score is affine in its input") {
  RngStream rng(66);
  const Dataset ds = gaussian_data(rng, 60, 3, 0.8);
  const LdaModel model = fit_lda(ds);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(3), d(3);
    for (int k = 0; k < 3; ++k) {
      x(k) = rng.normal();
      d(k) = rng.normal();
    }
    const double first = model.score(x + d) - model.score(x);
    const double second = model.score(x + 2 * d) - model.score(x + d);
    CHECK(std::abs(first - second) < 1e-8);
  }
}

TEST_CASE("doubling all features preserves lda scores") {
  RngStream rng(72);
  const Dataset ds = gaussian_data(rng, 80, 3, 0.6);
  const LdaModel base = fit_lda(ds);  // default stabilizer scales with trace
  const Dataset doubled(2.0 * ds.features(), ds.labels(), ds.names());
  const LdaModel scaled = fit_lda(doubled);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::VectorXd x(3);
    for (int k = 0; k < 3; ++k) x(k) = rng.normal();
    CHECK(scaled.score(2.0 * x) ==
          doctest::Approx(base.score(x)).epsilon(1e-10));
  }
}

TEST_CASE("singular covariance with a zero stabilizer is an error") {
  Eigen::MatrixXd x(8, 2);
  for (int i = 0; i < 8; ++i) {
    x(i, 0) = i;
    x(i, 1) = 2.0 * i;  // rank one
  }
  const Dataset ds(x, {0, 0, 0, 0, 1, 1, 1, 1}, {"a", "b"});
  CHECK_THROWS_AS(fit_lda(ds, 0.0), std::runtime_error);
  CHECK_NOTHROW(fit_lda(ds));  // default stabilizer copes
}

// --- PLS ---

TEST_CASE("simpls with one feature uses the unit direction") {
  RngStream rng(81);
  Eigen::MatrixXd x(40, 1);
  std::vector<int> labels(40);
  for (int i = 0; i < 40; ++i) {
    labels[static_cast<std::size_t>(i)] = i % 2;
    x(i, 0) = rng.normal() + (i % 2) * 1.0;
  }
  const Dataset ds(x, labels, {"m"});
  const PlsBasis basis = simpls(ds, 1);
  CHECK(std::abs(std::abs(basis.directions(0, 0)) - 1.0) < 1e-12);
  // sign fixed so the latent variable covaries positively with the labels
  const Eigen::MatrixXd z = basis.scores(ds.features());
  double cov = 0.0;
  const double y_mean = 0.5;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    cov += z(i, 0) * (labels[static_cast<std::size_t>(i)] - y_mean);
  }
  CHECK(cov >= 0.0);
}

TEST_CASE("first simpls direction is the normalized cross-covariance") {
  RngStream rng(82);
  const Dataset raw = gaussian_data(rng, 50, 3, 0.9);
  for (bool autoscale : {false, true}) {
    const PlsBasis basis = simpls(raw, 2, autoscale);
    // oracle: X'y on the centered (and optionally scaled) design
    Eigen::MatrixXd x = raw.features();
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    if (autoscale) {
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        const double sd = std::sqrt(x.col(k).squaredNorm() /
                                    static_cast<double>(raw.n() - 1));
        x.col(k) /= sd;
      }
    }
    Eigen::VectorXd y(raw.n());
    for (Eigen::Index i = 0; i < raw.n(); ++i) {
      y(i) = raw.labels()[static_cast<std::size_t>(i)] - 0.5;
    }
    const Eigen::VectorXd expected = (x.transpose() * y).normalized();
    CHECK((basis.directions.col(0) - expected).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("simpls latent variables are mutually uncorrelated") {
  RngStream rng(83);
  const Dataset ds = gaussian_data(rng, 60, 6, 0.5);
  const PlsBasis basis = simpls(ds, 4);
  REQUIRE(basis.components() == 4);
  const Eigen::MatrixXd z = basis.scores(ds.features());
  const Eigen::MatrixXd centered = z.rowwise() - z.colwise().mean();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(ds.n() - 1);
  const double scale = cov.diagonal().maxCoeff();
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (a != b) CHECK(std::abs(cov(a, b)) < 1e-8 * scale);
    }
  }
}

TEST_CASE("simpls stops early when the rank is exhausted") {
  RngStream rng(84);
  Eigen::MatrixXd x(30, 3);
  std::vector<int> labels(30);
  for (int i = 0; i < 30; ++i) {
    labels[static_cast<std::size_t>(i)] = i % 2;
    x(i, 0) = rng.normal() + 0.8 * (i % 2);
    x(i, 1) = rng.normal();
    x(i, 2) = x(i, 0) + x(i, 1);  // rank 2 design
  }
  const Dataset ds(x, labels, {"a", "b", "c"});
  const PlsBasis basis = simpls(ds, 3);
  CHECK(basis.components() <= 2);
  CHECK(basis.rank_deficient);
}

TEST_CASE("pls-lda with one component ranks by the latent variable") {
  RngStream rng(85);
  const Dataset ds = gaussian_data(rng, 50, 4, 1.0);
  const PlsLdaModel model = fit_pls_lda(ds, 1);
  const PlsBasis basis = simpls(ds, 1);
  Eigen::VectorXd model_scores(ds.n());
  Eigen::VectorXd latent(ds.n());
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    model_scores(i) = model.score(ds.row(i));
    latent(i) = basis.project(ds.row(i))(0);
  }
  CHECK(ranking(model_scores) == ranking(latent));
}

TEST_CASE("pls-lda is chance level on null data") {
  RngStream rng(86);
  const Dataset train = gaussian_data(rng, 1000, 3, 0.0);
  const PlsLdaModel model = fit_pls_lda(train, 2);
  const Dataset validation = gaussian_data(rng, 1000, 3, 0.0);
  Eigen::VectorXd scores(validation.n());
  for (Eigen::Index i = 0; i < validation.n(); ++i) {
    scores(i) = model.score(validation.row(i));
  }
  const double auc =
      roc_curve({scores.data(), static_cast<std::size_t>(scores.size())},
                validation.labels())
          .auc;
  CHECK(std::abs(auc - 0.5) < 0.05);
}

TEST_CASE("pls-lda tracks lda on pure mean-shift data") {
  RngStream rng(87);
  const Dataset train = gaussian_data(rng, 200, 6, 0.6);
  const Dataset validation = gaussian_data(rng, 1500, 6, 0.6);
  const PlsLdaModel pls = fit_pls_lda(train, 6);
  const LdaModel lda = fit_lda(train);
  Eigen::VectorXd pls_scores(validation.n());
  Eigen::VectorXd lda_scores(validation.n());
  for (Eigen::Index i = 0; i < validation.n(); ++i) {
    pls_scores(i) = pls.score(validation.row(i));
    lda_scores(i) = lda.score(validation.row(i));
  }
  const double pls_auc = roc_curve({pls_scores.data(),
                                    static_cast<std::size_t>(pls_scores.size())},
                                   validation.labels())
                             .auc;
  const double lda_auc = roc_curve({lda_scores.data(),
                                    static_cast<std::size_t>(lda_scores.size())},
                                   validation.labels())
                             .auc;
  CHECK(std::abs(pls_auc - lda_auc) < 0.03);
}

// --- kNN ---

TEST_CASE("knn vote proportions") {
  Eigen::MatrixXd x(5, 1);
  x << 0.0, 1.0, 2.0, 10.0, 11.0;
  const std::vector<int> labels{1, 1, 0, 0, 0};
  const Dataset ds(x, labels, {"m"});

  SUBCASE("query on a training case with k=1") {
    const KnnModel model = fit_knn(ds, 1);
    CHECK(model.score(Eigen::VectorXd::Constant(1, 0.0)) == 1.0);
  }
  SUBCASE("k equal to the training size returns the prevalence") {
    const KnnModel model = fit_knn(ds, 5);
    CHECK(model.score(Eigen::VectorXd::Constant(1, 3.3)) ==
          doctest::Approx(2.0 / 5.0));
    CHECK(model.score(Eigen::VectorXd::Constant(1, -50.0)) ==
          doctest::Approx(2.0 / 5.0));
  }
  SUBCASE("three nearest labels (1,1,0) vote 2/3") {
    const KnnModel model = fit_knn(ds, 3);
    CHECK(model.score(Eigen::VectorXd::Constant(1, 0.5)) ==
          doctest::Approx(2.0 / 3.0));
  }
  SUBCASE("neighbor count is validated") {
    CHECK_THROWS_AS(fit_knn(ds, 6), std::invalid_argument);
    CHECK_THROWS_AS(fit_knn(ds, 0), std::invalid_argument);
  }
}

TEST_CASE("distance ties at the k-th neighbor widen the vote") {
  Eigen::MatrixXd x(4, 1);
  x << -1.0, 1.0, 3.0, -3.0;
  const std::vector<int> labels{0, 1, 0, 1};
  const Dataset ds(x, labels, {"m"});
  const KnnModel model = fit_knn(ds, 1);
  // both -1 and +1 sit at distance 1 from the query: both vote
  CHECK(model.score(Eigen::VectorXd::Constant(1, 0.0)) ==
        doctest::Approx(0.5));
}

TEST_CASE("knn rejects incomplete queries") {
  Eigen::MatrixXd x(4, 2);
  x.setRandom();
  const Dataset ds(x, {0, 1, 0, 1}, {"a", "b"});
  const KnnModel model = fit_knn(ds, 2);
  Eigen::VectorXd q(2);
  q << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(model.score(q), std::invalid_argument);
}

// --- shared scorer behaviour ---

TEST_CASE("score rankings are invariant to training row order") {
  RngStream rng(91);
  const Dataset ds = gaussian_data(rng, 60, 4, 0.8);
  std::vector<int> permutation(static_cast<std::size_t>(ds.n()));
  std::iota(permutation.begin(), permutation.end(), 0);
  rng.shuffle(permutation);
  const Dataset shuffled = ds.subset(permutation);

  const Dataset probes = gaussian_data(rng, 40, 4, 0.8);
  for (const std::string& name : known_method_names()) {
    ParamSetting setting;
    setting.lambda = 0.4;
    setting.components = 2;
    setting.neighbors = 5;
    const auto method = make_classifier(name);
    const auto a = method->fit(ds, setting);
    const auto b = method->fit(shuffled, setting);
    CHECK(ranking(score_all(*a, probes)) == ranking(score_all(*b, probes)));
  }
}

TEST_CASE("baseline fitters reject missing cells") {
  Eigen::MatrixXd x(6, 2);
  x.setRandom();
  x(2, 1) = std::numeric_limits<double>::quiet_NaN();
  const Dataset ds(x, {0, 1, 0, 1, 0, 1}, {"a", "b"});
  CHECK_THROWS_AS(fit_logistic(ds), std::invalid_argument);
  CHECK_THROWS_AS(fit_lda(ds), std::invalid_argument);
  CHECK_THROWS_AS(pca(ds), std::invalid_argument);
  CHECK_THROWS_AS(simpls(ds, 1), std::invalid_argument);
  CHECK_THROWS_AS(fit_knn(ds, 2), std::invalid_argument);
}

TEST_CASE("baseline model serialization round-trips") {
  RngStream rng(95);
  const Dataset ds = gaussian_data(rng, 40, 3, 0.5);

  const PcaBasis basis = pca(ds);
  const PcaBasis basis2 = pca_from_json_string(to_json_string(basis));
  CHECK(basis2.eigenvalues == basis.eigenvalues);
  CHECK(basis2.eigenvectors == basis.eigenvectors);

  const LdaModel lda = fit_lda(ds);
  const LdaModel lda2 = lda_from_json_string(to_json_string(lda));
  CHECK(lda2.direction == lda.direction);
  CHECK(lda2.offset == lda.offset);

  const PlsBasis pls = simpls(ds, 2);
  const PlsBasis pls2 = pls_from_json_string(to_json_string(pls));
  CHECK(pls2.directions == pls.directions);
  CHECK(pls2.scale == pls.scale);

  const KnnModel knn = fit_knn(ds, 3);
  const KnnModel knn2 = knn_from_json_string(to_json_string(knn));
  Eigen::VectorXd q(3);
  q << 0.2, -0.1, 0.4;
  CHECK(knn2.score(q) == knn.score(q));
}
