#pragma once

#include <Eigen/Dense>
#include <string>

#include "qbplab/dataset.hpp"
#include "qbplab/lda.hpp"

namespace qbplab {

// Partial least squares basis from the SIMPLS construction: unit direction
// vectors of maximal covariance with the centered response, extracted so
// that the latent variables are mutually uncorrelated on the training data.
struct PlsBasis {
  Eigen::MatrixXd directions;  // r x achieved component count
  Eigen::VectorXd center;      // feature means
  Eigen::VectorXd scale;       // per-feature divisor (all 1 when unscaled)
  bool rank_deficient = false;  // requested count was truncated

  Eigen::Index components() const { return directions.cols(); }
  Eigen::MatrixXd scores(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
};

// Requires 1 <= components <= min(r, n - 1) and complete data. When the
// cross-covariance is exhausted early the achieved count is returned with
// rank_deficient set.
//
// With `autoscale` (the default) columns are standardized to unit sample
// sd before direction extraction, the usual convention when biomarkers
// live on wildly different scales; the covariance criterion is otherwise
// dominated by the largest-variance columns regardless of their relevance.
// Constant columns get scale 1 and never enter a direction.
PlsBasis simpls(const Dataset& ds, Eigen::Index components,
                bool autoscale = true);

// Fisher/Gaussian LDA on the PLS latent variables.
struct PlsLdaModel {
  PlsBasis basis;
  LdaModel lda;

  double score(const Eigen::VectorXd& x) const {
    return lda.score(basis.project(x));
  }
};

PlsLdaModel fit_pls_lda(const Dataset& ds, Eigen::Index components);

std::string to_json_string(const PlsBasis& basis);
PlsBasis pls_from_json_string(const std::string& text);

}  // namespace qbplab
