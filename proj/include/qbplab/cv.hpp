#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qbplab/classifier.hpp"
#include "qbplab/dataset.hpp"
#include "qbplab/metrics.hpp"
#include "qbplab/simgen.hpp"

namespace qbplab {

struct TuneResult {
  int chosen_index = 0;
  ParamSetting chosen;
  std::vector<double> mean_auc;  // per grid setting
};

// K-fold tuning: fit every setting on each fold complement, score the held
// out fold, choose the setting with the highest mean AUC; ties go to the
// earliest grid position.
TuneResult kfold_tune(const Dataset& train, const Classifier& method,
                      const std::vector<ParamSetting>& grid,
                      const FoldAssignment& folds);
TuneResult kfold_tune(const Dataset& train, const Classifier& method,
                      const std::vector<ParamSetting>& grid, int num_folds,
                      RngStream& rng);

struct BenchmarkRow {
  std::string method;
  int repetition = 0;
  std::string chosen_params;
  double validation_auc = 0.0;
  double selected_count = 0.0;
  std::optional<SelectionReport> selection;
};

struct MethodSummary {
  std::string method;
  double mean_auc = 0.0;
  double sd_auc = 0.0;
  int repetitions = 0;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;

  // Per-method mean/sd of the repetition AUCs, in first-seen method order.
  std::vector<MethodSummary> summarize() const;
};

// Tune on the training set, refit with the chosen setting, evaluate on the
// validation set. Validation rows are never touched before the final
// scoring step.
BenchmarkRow benchmark_split(const Dataset& train, const Dataset& validation,
                             const Classifier& method,
                             const FoldAssignment& folds,
                             const std::optional<RelevanceMask>& relevance);

struct BenchmarkOptions {
  int repetitions = 50;
  std::uint64_t master_seed = 1;
  int folds = 6;
  int validation_n = 5000;
  int threads = 1;
  MethodOptions method_options;
};

// Simulation protocol: per repetition, draw a fresh training set of the
// design size and a fresh validation set of validation_n subjects (same
// case proportion), tune by K-fold CV, refit, record the validation AUC
// and selection metrics. Repetitions run on derived seeds, so output is
// independent of the thread count.
BenchmarkResult simulate_benchmark(const SimDesign& design,
                                   const std::vector<std::string>& methods,
                                   const BenchmarkOptions& options);

struct RdcvOptions {
  int repetitions = 50;
  std::uint64_t master_seed = 1;
  int outer_folds = 6;
  int inner_folds = 6;
  int threads = 1;
  MethodOptions method_options;
  std::optional<RelevanceMask> relevance;
};

// Repeated double CV on a fixed dataset: each repetition draws a new
// stratified outer split; every outer fold is tuned by inner CV on its
// training part, refitted and scored on its test part. The repetition AUC
// is the mean over outer folds. All methods see identical splits.
BenchmarkResult rdcv(const Dataset& ds, const std::vector<std::string>& methods,
                     const RdcvOptions& options);

// One row per (method, repetition); chosen_params is quoted because labels
// may contain commas' worth of structure.
void write_rows_csv(const BenchmarkResult& result, const std::string& path);
void write_summary_csv(const BenchmarkResult& result, const std::string& path);

}  // namespace qbplab
