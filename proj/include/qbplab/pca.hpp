#pragma once

#include <Eigen/Dense>
#include <string>

#include "qbplab/dataset.hpp"
#include "qbplab/logistic.hpp"

namespace qbplab {

// Eigendecomposition of the centered sample covariance (n-1 denominator).
// Columns of `eigenvectors` are orthonormal, eigenvalues nonincreasing and
// clamped at zero.
struct PcaBasis {
  Eigen::MatrixXd eigenvectors;  // r x r
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::VectorXd center;        // column means

  // Centered projection onto the first `components` eigenvectors.
  Eigen::MatrixXd scores(const Eigen::MatrixXd& x, Eigen::Index components) const;
  Eigen::VectorXd project(const Eigen::VectorXd& x, Eigen::Index components) const;
  double explained_variance_percent(Eigen::Index components) const;
};

PcaBasis pca(const Dataset& ds);

// Logistic regression on the leading principal components, taken in the
// natural order of explained variance.
struct PclrModel {
  PcaBasis basis;
  Eigen::Index components = 0;
  LogisticModel logit;

  double score(const Eigen::VectorXd& x) const;
};

PclrModel fit_pclr(const Dataset& ds, Eigen::Index components);

std::string to_json_string(const PcaBasis& basis);
PcaBasis pca_from_json_string(const std::string& text);

}  // namespace qbplab
