#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qbplab/rng.hpp"

namespace qbplab {

// An n x r matrix of continuous biomarker values with binary group labels
// (0 = control, 1 = case). Missing cells are stored as NaN; every accessor
// treats NaN as "missing", never as a value. Immutable after construction.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd features, std::vector<int> labels,
          std::vector<std::string> names, std::string label_name = "y");

  Eigen::Index n() const { return features_.rows(); }
  Eigen::Index num_biomarkers() const { return features_.cols(); }

  const Eigen::MatrixXd& features() const { return features_; }
  double value(Eigen::Index i, Eigen::Index k) const { return features_(i, k); }
  bool is_missing(Eigen::Index i, Eigen::Index k) const {
    return std::isnan(features_(i, k));
  }
  bool has_missing() const;

  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& label_name() const { return label_name_; }

  Eigen::VectorXd row(Eigen::Index i) const { return features_.row(i); }

  std::vector<int> class_indices(int label) const;
  int count_label(int label) const;

  // New dataset holding the given rows, in the given order.
  Dataset subset(std::span<const int> rows) const;

  // Value equality; missing cells compare equal to missing cells.
  bool operator==(const Dataset& other) const;

 private:
  Eigen::MatrixXd features_;
  std::vector<int> labels_;
  std::vector<std::string> names_;
  std::string label_name_;
};

// Partition of subjects into folds. fold_of[i] is in [0, num_folds).
struct FoldAssignment {
  std::vector<int> fold_of;
  int num_folds = 0;

  std::vector<std::vector<int>> members() const;
  // Complement of one fold (the training rows for that fold).
  std::vector<int> complement(int fold) const;
};

// Column-wise location/scale transform fitted on training data and
// replayable on new observations. Columns with zero spread map to zero.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;  // 0 flags a constant column

  double apply(double x, Eigen::Index k) const;
  Eigen::VectorXd apply_row(const Eigen::VectorXd& x) const;
};

// Reads a comma-delimited file with one header row. Empty cells become
// missing values; the named label column must contain only 0/1. Errors
// report the offending 1-based row and column.
Dataset load_csv(const std::string& path, const std::string& label_column);

// Writes the label column first, then biomarker columns, using shortest
// round-trip formatting so load_csv(write_csv(ds)) reproduces ds exactly.
void write_csv(const Dataset& ds, const std::string& path);

// Class-stratified fold assignment: per-class counts differ by at most one
// across folds. Requires each class to have at least K members.
FoldAssignment stratified_folds(const Dataset& ds, int num_folds,
                                RngStream& rng);

// Column-wise standardization to mean 0, sd 1 (sample sd, n-1 denominator),
// computed over non-missing cells. Constant columns become all zero.
std::pair<Dataset, Standardizer> standardize(const Dataset& ds);

// Throws unless the dataset has at least one case and one control.
void require_both_classes(const Dataset& ds);

// Throws if any cell is missing; `context` names the operation.
void require_complete(const Dataset& ds, const std::string& context);

}  // namespace qbplab
