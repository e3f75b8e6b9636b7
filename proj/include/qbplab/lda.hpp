#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "qbplab/dataset.hpp"

namespace qbplab {

// Gaussian linear discriminant with pooled covariance and empirical class
// priors. score(x) is the log posterior-odds of being a case, an affine
// function of x.
struct LdaModel {
  Eigen::VectorXd mean_controls;
  Eigen::VectorXd mean_cases;
  Eigen::MatrixXd pooled_covariance;
  double epsilon = 0.0;          // ridge stabilizer actually applied
  double log_prior_ratio = 0.0;  // log(pi_case / pi_control)

  // Cached affine discriminant.
  Eigen::VectorXd direction;
  double offset = 0.0;

  double score(const Eigen::VectorXd& x) const {
    return offset + direction.dot(x);
  }
};

// Fits on complete data with >= 2 subjects per class. By default the pooled
// covariance is stabilized with epsilon = 1e-6 * trace / r before
// inversion; pass an explicit epsilon (possibly 0) to override. A singular
// covariance with epsilon 0 is an error.
LdaModel fit_lda(const Dataset& ds,
                 std::optional<double> epsilon = std::nullopt);

std::string to_json_string(const LdaModel& model);
LdaModel lda_from_json_string(const std::string& text);

}  // namespace qbplab
