#include "qbplab/pca.hpp"

#include <stdexcept>

#include <json.hpp>

namespace qbplab {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          rows[i][k];
    }
  }
  return m;
}

}  // namespace

Eigen::MatrixXd PcaBasis::scores(const Eigen::MatrixXd& x,
                                 Eigen::Index components) const {
  return (x.rowwise() - center.transpose()) *
         eigenvectors.leftCols(components);
}

Eigen::VectorXd PcaBasis::project(const Eigen::VectorXd& x,
                                  Eigen::Index components) const {
  return eigenvectors.leftCols(components).transpose() * (x - center);
}

double PcaBasis::explained_variance_percent(Eigen::Index components) const {
  const double total = eigenvalues.sum();
  if (total <= 0.0) return 0.0;
  return 100.0 * eigenvalues.head(components).sum() / total;
}

PcaBasis pca(const Dataset& ds) {
  require_complete(ds, "principal component analysis");
  const Eigen::MatrixXd& x = ds.features();
  const Eigen::Index n = x.rows();

  PcaBasis basis;
  basis.center = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - basis.center.transpose();
  const Eigen::MatrixXd covariance =
      centered.transpose() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed");
  }
  // Solver returns ascending eigenvalues; flip to descending and clamp the
  // numerically negative ones.
  const Eigen::Index r = covariance.rows();
  basis.eigenvalues.resize(r);
  basis.eigenvectors.resize(r, r);
  for (Eigen::Index k = 0; k < r; ++k) {
    basis.eigenvalues(k) = std::max(solver.eigenvalues()(r - 1 - k), 0.0);
    basis.eigenvectors.col(k) = solver.eigenvectors().col(r - 1 - k);
  }
  // Deterministic sign: largest-magnitude loading is positive.
  for (Eigen::Index k = 0; k < r; ++k) {
    Eigen::Index arg = 0;
    basis.eigenvectors.col(k).cwiseAbs().maxCoeff(&arg);
    if (basis.eigenvectors(arg, k) < 0.0) {
      basis.eigenvectors.col(k) = -basis.eigenvectors.col(k);
    }
  }
  return basis;
}

double PclrModel::score(const Eigen::VectorXd& x) const {
  return logit.score(basis.project(x, components));
}

PclrModel fit_pclr(const Dataset& ds, Eigen::Index components) {
  if (components < 1 || components > ds.num_biomarkers()) {
    throw std::invalid_argument("component count outside [1, r]");
  }
  PclrModel model;
  model.basis = pca(ds);
  model.components = components;

  const Eigen::MatrixXd z = model.basis.scores(ds.features(), components);
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(components));
  for (Eigen::Index c = 0; c < components; ++c) {
    names.push_back("pc" + std::to_string(c + 1));
  }
  const Dataset latent(z, ds.labels(), std::move(names), ds.label_name());
  model.logit = fit_logistic(latent);
  return model;
}

std::string to_json_string(const PcaBasis& basis) {
  nlohmann::json doc{
      {"schema", "qbplab.pca_basis"},
      {"version", 1},
      {"eigenvectors", matrix_to_json(basis.eigenvectors)},
      {"eigenvalues", std::vector<double>(basis.eigenvalues.begin(),
                                          basis.eigenvalues.end())},
      {"center",
       std::vector<double>(basis.center.begin(), basis.center.end())}};
  return doc.dump(2);
}

PcaBasis pca_from_json_string(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  if (doc.at("schema").get<std::string>() != "qbplab.pca_basis" ||
      doc.at("version").get<int>() != 1) {
    throw std::runtime_error("unsupported pca document");
  }
  PcaBasis basis;
  basis.eigenvectors = matrix_from_json(doc.at("eigenvectors"));
  const auto values = doc.at("eigenvalues").get<std::vector<double>>();
  basis.eigenvalues = Eigen::Map<const Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
  const auto center = doc.at("center").get<std::vector<double>>();
  basis.center = Eigen::Map<const Eigen::VectorXd>(
      center.data(), static_cast<Eigen::Index>(center.size()));
  return basis;
}

}  // namespace qbplab
