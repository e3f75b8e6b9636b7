#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qbplab {

// ROC curve over the distinct score values, from (0,0) to (1,1), with the
// trapezoidal area. Higher score means more case-like; a subject is
// predicted positive when its score is >= the threshold.
struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr)
  double auc = 0.0;
};

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

// Rank-statistic AUC: fraction of (case, control) pairs where the case
// outscores the control, ties counted half. Computed from midranks, fully
// independent of the ROC sweep; serves as its algebraic cross-check.
double auc_rank(std::span<const double> scores, std::span<const int> labels);

// (sensitivity, specificity) when predicting case for score >= threshold.
std::pair<double, double> confusion_at_threshold(std::span<const double> scores,
                                                 std::span<const int> labels,
                                                 double threshold);

// Biomarker-selection quality against a ground-truth relevance mask.
struct SelectionReport {
  double sensitivity = 0.0;  // NaN when no biomarker is relevant
  double specificity = 0.0;
  double accuracy = 0.0;
  bool sensitivity_defined = true;
};

SelectionReport selection_performance(std::span<const std::uint8_t> selected,
                                      std::span<const std::uint8_t> relevant);

// Two-column (fpr, tpr) CSV; the AUC goes into a leading comment line.
void write_roc_csv(const RocCurve& curve, const std::string& path);

}  // namespace qbplab
