#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qbplab/dataset.hpp"

namespace qbplab {

// k-nearest-neighbors vote-proportion scorer. Training features are
// standardized at fit time and queries are run through the same transform,
// so distances weigh every biomarker equally.
struct KnnModel {
  Eigen::MatrixXd train_features;  // standardized
  std::vector<int> labels;
  int neighbors = 1;
  Standardizer standardizer;

  // Fraction of case labels among the nearest neighbors. Distance ties at
  // the k-th position widen the vote to all tied candidates.
  double score(const Eigen::VectorXd& x) const;
};

KnnModel fit_knn(const Dataset& ds, int neighbors);

std::string to_json_string(const KnnModel& model);
KnnModel knn_from_json_string(const std::string& text);

}  // namespace qbplab
