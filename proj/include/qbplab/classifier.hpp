#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qbplab/dataset.hpp"
#include "qbplab/qbp.hpp"

namespace qbplab {

// One candidate parameter setting. Only the fields a method reads are
// meaningful; `label` is what lands in result CSVs.
struct ParamSetting {
  std::string label = "default";
  double lambda = 0.0;
  double alpha = 0.5;
  int components = 0;
  int neighbors = 0;
  std::vector<double> ratio_bounds;
  std::vector<double> max_scores;
};

// A fitted model exposing a continuous case-likeness score.
class FittedClassifier {
 public:
  virtual ~FittedClassifier() = default;
  virtual double score(const Eigen::VectorXd& x) const = 0;
  // Which biomarkers the final model actually uses; methods without a
  // selection mechanism report all of them.
  virtual std::vector<std::uint8_t> selected_biomarkers(Eigen::Index r) const;
};

// Shared tuning-grid knobs. Defaults follow the benchmark protocol: the
// QBP grid crosses six exceedratio-bound triples with two score ladders,
// penalized regression walks a 50-point lambda path, component counts run
// up to the fit size, and the kNN candidate set steps by 1 up to 20 and
// coarser beyond.
struct MethodOptions {
  double en_alpha = 0.5;
  int lambda_count = 50;
  double lambda_min_ratio = 1e-4;
  std::vector<std::vector<double>> qbp_ratio_bounds{
      {1.5, 2.0, 3.0}, {1.5, 2.0, 5.0}, {1.5, 2.5, 5.0},
      {1.4, 2.5, 8.0}, {2.0, 3.0, 6.0}, {2.0, 3.0, 10.0}};
  std::vector<std::vector<double>> qbp_max_scores{{1.0, 2.0, 3.0},
                                                  {1.0, 4.0, 9.0}};
  std::vector<int> knn_candidates{1,  2,  3,  4,  5,  6,  7,  8,  9,  10,
                                  11, 12, 13, 14, 15, 16, 17, 18, 19, 20,
                                  25, 30, 40, 50, 75, 100, 150};
  QuantileRule qbp_quantile_rule = QuantileRule::order_statistic;
};

// A classification method: produces its tuning grid for a training set and
// fits a scorer for one setting. `min_fit_n` is the smallest training size
// the settings will be fitted on (the fold complements during tuning), so
// grids can stay feasible.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual const std::string& name() const = 0;
  virtual std::vector<ParamSetting> tuning_grid(const Dataset& train,
                                                int min_fit_n) const = 0;
  virtual std::unique_ptr<FittedClassifier> fit(
      const Dataset& train, const ParamSetting& setting) const = 0;
  // Fits every setting on one training set. The default loops over fit();
  // methods with shared work across settings (penalty paths, component
  // prefixes, common tail statistics) override it.
  virtual std::vector<std::unique_ptr<FittedClassifier>> fit_grid(
      const Dataset& train, const std::vector<ParamSetting>& grid) const;
};

// Registry keyed by the CLI method names: qbp, lr, plr-lasso, plr-en,
// plr-ridge, pclr, lda, pls-lda, knn. Unknown names raise an error that
// lists the valid ones.
std::unique_ptr<Classifier> make_classifier(const std::string& name,
                                            const MethodOptions& options = {});
const std::vector<std::string>& known_method_names();

// Scores the given rows of a dataset.
Eigen::VectorXd score_rows(const FittedClassifier& model, const Dataset& ds,
                           std::span<const int> rows);
Eigen::VectorXd score_all(const FittedClassifier& model, const Dataset& ds);

}  // namespace qbplab
