#include "qbplab/pls.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace qbplab {

Eigen::MatrixXd PlsBasis::scores(const Eigen::MatrixXd& x) const {
  return ((x.rowwise() - center.transpose()).array().rowwise() /
          scale.transpose().array())
             .matrix() *
         directions;
}

Eigen::VectorXd PlsBasis::project(const Eigen::VectorXd& x) const {
  return directions.transpose() *
         ((x - center).array() / scale.array()).matrix();
}

PlsBasis simpls(const Dataset& ds, Eigen::Index components, bool autoscale) {
  require_complete(ds, "partial least squares");
  require_both_classes(ds);
  const Eigen::Index n = ds.n();
  const Eigen::Index r = ds.num_biomarkers();
  if (components < 1 || components > std::min(r, n - 1)) {
    throw std::invalid_argument("component count outside [1, min(r, n-1)]");
  }

  PlsBasis basis;
  basis.center = ds.features().colwise().mean();
  basis.scale = Eigen::VectorXd::Ones(r);
  if (autoscale) {
    for (Eigen::Index k = 0; k < r; ++k) {
      const double ss =
          (ds.features().col(k).array() - basis.center(k)).square().sum();
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      if (sd > 0.0) basis.scale(k) = sd;
    }
  }
  const Eigen::MatrixXd x_centered =
      ((ds.features().rowwise() - basis.center.transpose()).array().rowwise() /
       basis.scale.transpose().array())
          .matrix();
  Eigen::VectorXd y_centered(n);
  double y_mean = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    y_mean += ds.labels()[static_cast<std::size_t>(i)];
  }
  y_mean /= static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y_centered(i) = ds.labels()[static_cast<std::size_t>(i)] - y_mean;
  }

  // Cross-covariance direction, deflated after each extraction against the
  // loading basis so later latent variables stay uncorrelated with the
  // earlier ones.
  Eigen::VectorXd cross = x_centered.transpose() * y_centered;
  const double initial_norm = cross.norm();

  Eigen::MatrixXd directions(r, components);
  Eigen::MatrixXd loading_basis(r, components);
  Eigen::Index achieved = 0;
  for (Eigen::Index l = 0; l < components; ++l) {
    const double norm = cross.norm();
    if (!(norm > 1e-12 * std::max(initial_norm, 1.0))) {
      break;  // response covariance exhausted
    }
    const Eigen::VectorXd direction = cross / norm;
    const Eigen::VectorXd latent = x_centered * direction;
    const double latent_ss = latent.squaredNorm();
    if (!(latent_ss > 0.0)) {
      break;
    }
    Eigen::VectorXd loading = x_centered.transpose() * latent / latent_ss;
    for (Eigen::Index u = 0; u < achieved; ++u) {
      loading -= loading_basis.col(u).dot(loading) * loading_basis.col(u);
    }
    const double loading_norm = loading.norm();
    if (!(loading_norm > 0.0)) {
      break;
    }
    loading /= loading_norm;

    directions.col(achieved) = direction;
    loading_basis.col(achieved) = loading;
    cross -= loading * loading.dot(cross);
    ++achieved;
  }
  if (achieved == 0) {
    throw std::runtime_error(
        "no usable PLS direction: response carries no covariance");
  }
  basis.directions = directions.leftCols(achieved);
  basis.rank_deficient = achieved < components;
  return basis;
}

PlsLdaModel fit_pls_lda(const Dataset& ds, Eigen::Index components) {
  PlsLdaModel model;
  model.basis = simpls(ds, components);

  const Eigen::MatrixXd z = model.basis.scores(ds.features());
  std::vector<std::string> names;
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    names.push_back("lv" + std::to_string(c + 1));
  }
  const Dataset latent(z, ds.labels(), std::move(names), ds.label_name());
  model.lda = fit_lda(latent);
  return model;
}

std::string to_json_string(const PlsBasis& basis) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < basis.directions.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < basis.directions.cols(); ++j) {
      row.push_back(basis.directions(i, j));
    }
    rows.push_back(std::move(row));
  }
  nlohmann::json doc{
      {"schema", "qbplab.pls_basis"},
      {"version", 1},
      {"directions", rows},
      {"center",
       std::vector<double>(basis.center.begin(), basis.center.end())},
      {"scale", std::vector<double>(basis.scale.begin(), basis.scale.end())},
      {"rank_deficient", basis.rank_deficient}};
  return doc.dump(2);
}

PlsBasis pls_from_json_string(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  if (doc.at("schema").get<std::string>() != "qbplab.pls_basis" ||
      doc.at("version").get<int>() != 1) {
    throw std::runtime_error("unsupported pls document");
  }
  PlsBasis basis;
  const auto rows = doc.at("directions").get<std::vector<std::vector<double>>>();
  basis.directions.resize(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      basis.directions(static_cast<Eigen::Index>(i),
                       static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  const auto center = doc.at("center").get<std::vector<double>>();
  basis.center = Eigen::Map<const Eigen::VectorXd>(
      center.data(), static_cast<Eigen::Index>(center.size()));
  const auto scale = doc.at("scale").get<std::vector<double>>();
  basis.scale = Eigen::Map<const Eigen::VectorXd>(
      scale.data(), static_cast<Eigen::Index>(scale.size()));
  basis.rank_deficient = doc.at("rank_deficient").get<bool>();
  return basis;
}

}  // namespace qbplab
