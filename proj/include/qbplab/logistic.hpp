#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "qbplab/dataset.hpp"

namespace qbplab {

enum class Penalty { none, lasso, elastic_net, ridge };

std::string penalty_name(Penalty p);

// Logistic regression model on the original feature scale. score() is the
// fitted class-1 probability.
struct LogisticModel {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  Penalty penalty = Penalty::none;
  double lambda = 0.0;
  double alpha = 1.0;
  bool converged = true;
  int iterations = 0;

  double linear_predictor(const Eigen::VectorXd& x) const {
    return intercept + coefficients.dot(x);
  }
  double score(const Eigen::VectorXd& x) const;
  std::vector<std::uint8_t> selected() const;  // nonzero slopes
};

// Maximum-likelihood fit by iteratively reweighted least squares with step
// halving. Converged when the log-likelihood improves by less than 1e-10
// (plus one polishing Newton step) or after 100 iterations; a fit that runs
// out of iterations - the perfect-separation case - is returned with
// converged = false.
LogisticModel fit_logistic(const Dataset& ds);

// Per-sweep trace of the penalized objective, for convergence diagnostics.
struct PenalizedFitInfo {
  std::vector<double> objective_trace;
  int sweeps = 0;
};

// Penalized maximum likelihood: maximizes l(beta) - lambda * P(beta) where
// P is the lasso, elastic-net or ridge penalty on the slopes. Features are
// standardized internally before penalization and the intercept is never
// penalized; returned coefficients are on the original scale.
//
// The solver is cyclic coordinate descent on a fixed-curvature quadratic
// minorant of the log-likelihood (curvature bound X'X/4), with exact
// soft-thresholding for the l1 part. Every sweep increases the true
// penalized objective, so the objective trace is nondecreasing.
LogisticModel fit_penalized_logistic(const Dataset& ds, Penalty penalty,
                                     double lambda, double alpha = 0.5,
                                     PenalizedFitInfo* info = nullptr,
                                     const LogisticModel* warm_start = nullptr);

// Log-likelihood of the model on a dataset.
double logistic_log_likelihood(const Dataset& ds, const LogisticModel& model);

// Analytic score vector d l / d beta, intercept first, original scale.
Eigen::VectorXd logistic_gradient(const Dataset& ds,
                                  const LogisticModel& model);

// Smallest lambda that drives every slope to zero (computed from the
// gradient at the null model on standardized features). For penalties
// without an l1 part the usual small-alpha surrogate is used.
double lambda_max(const Dataset& ds, Penalty penalty, double alpha);

// Log-spaced path from lambda_max down to lambda_max * min_ratio,
// descending.
std::vector<double> lambda_path(const Dataset& ds, Penalty penalty,
                                double alpha, int count = 50,
                                double min_ratio = 1e-4);

// Versioned JSON for audit and reload.
std::string to_json_string(const LogisticModel& model);
LogisticModel logistic_from_json_string(const std::string& text);

}  // namespace qbplab
