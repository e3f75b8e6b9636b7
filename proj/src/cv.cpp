#include "qbplab/cv.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "qbplab/rng.hpp"

namespace qbplab {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

// Runs fn(0..total-1) on a small worker pool. Work items must be mutually
// independent; the first exception wins and is rethrown after the join.
void run_parallel(int total, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, total));
  if (threads == 1) {
    for (int i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        const int index = next.fetch_add(1);
        if (index >= total) break;
        try {
          fn(index);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
        }
      }
    });
  }
  for (auto& worker : pool) worker.join();
  if (error) std::rethrow_exception(error);
}

std::vector<int> fold_labels(const Dataset& ds, const std::vector<int>& rows) {
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (int i : rows) {
    labels.push_back(ds.labels()[static_cast<std::size_t>(i)]);
  }
  return labels;
}

int min_fit_size(const FoldAssignment& folds) {
  const auto members = folds.members();
  int total = static_cast<int>(folds.fold_of.size());
  int smallest = total;
  for (const auto& fold : members) {
    smallest = std::min(smallest, total - static_cast<int>(fold.size()));
  }
  return smallest;
}

double selected_total(const std::vector<std::uint8_t>& flags) {
  double total = 0.0;
  for (auto f : flags) total += f != 0;
  return total;
}

std::vector<std::unique_ptr<Classifier>> build_methods(
    const std::vector<std::string>& names, const MethodOptions& options) {
  if (names.empty()) {
    throw std::invalid_argument("at least one method is required");
  }
  std::vector<std::unique_ptr<Classifier>> methods;
  methods.reserve(names.size());
  for (const auto& name : names) {
    methods.push_back(make_classifier(name, options));
  }
  return methods;
}

}  // namespace

TuneResult kfold_tune(const Dataset& train, const Classifier& method,
                      const std::vector<ParamSetting>& grid,
                      const FoldAssignment& folds) {
  if (grid.empty()) {
    throw std::invalid_argument("tuning grid must be nonempty");
  }
  if (static_cast<Eigen::Index>(folds.fold_of.size()) != train.n()) {
    throw std::invalid_argument("fold assignment does not match dataset");
  }
  const auto members = folds.members();
  std::vector<double> auc_sum(grid.size(), 0.0);
  for (int f = 0; f < folds.num_folds; ++f) {
    const std::vector<int> train_rows = folds.complement(f);
    const Dataset fold_train = train.subset(train_rows);
    const auto models = method.fit_grid(fold_train, grid);
    const std::vector<int> labels =
        fold_labels(train, members[static_cast<std::size_t>(f)]);
    for (std::size_t s = 0; s < grid.size(); ++s) {
      const Eigen::VectorXd scores =
          score_rows(*models[s], train, members[static_cast<std::size_t>(f)]);
      try {
        auc_sum[s] += roc_curve({scores.data(),
                                 static_cast<std::size_t>(scores.size())},
                                labels)
                          .auc;
      } catch (const std::exception& e) {
        throw std::runtime_error("fold " + std::to_string(f) +
                                 " AUC undefined: " + e.what());
      }
    }
  }
  TuneResult result;
  result.mean_auc.resize(grid.size());
  for (std::size_t s = 0; s < grid.size(); ++s) {
    result.mean_auc[s] = auc_sum[s] / folds.num_folds;
  }
  // Earliest grid position wins ties.
  std::size_t best = 0;
  for (std::size_t s = 1; s < grid.size(); ++s) {
    if (result.mean_auc[s] > result.mean_auc[best]) best = s;
  }
  result.chosen_index = static_cast<int>(best);
  result.chosen = grid[best];
  return result;
}

TuneResult kfold_tune(const Dataset& train, const Classifier& method,
                      const std::vector<ParamSetting>& grid, int num_folds,
                      RngStream& rng) {
  const FoldAssignment folds = stratified_folds(train, num_folds, rng);
  return kfold_tune(train, method, grid, folds);
}

BenchmarkRow benchmark_split(const Dataset& train, const Dataset& validation,
                             const Classifier& method,
                             const FoldAssignment& folds,
                             const std::optional<RelevanceMask>& relevance) {
  const auto grid = method.tuning_grid(train, min_fit_size(folds));
  const TuneResult tuned = kfold_tune(train, method, grid, folds);
  const auto final_model = method.fit(train, tuned.chosen);

  const Eigen::VectorXd scores = score_all(*final_model, validation);
  BenchmarkRow row;
  row.method = method.name();
  row.chosen_params = tuned.chosen.label;
  row.validation_auc =
      roc_curve({scores.data(), static_cast<std::size_t>(scores.size())},
                validation.labels())
          .auc;
  const auto selected =
      final_model->selected_biomarkers(train.num_biomarkers());
  row.selected_count = selected_total(selected);
  if (relevance.has_value()) {
    row.selection = selection_performance(selected, relevance->relevant);
  }
  return row;
}

std::vector<MethodSummary> BenchmarkResult::summarize() const {
  std::vector<MethodSummary> summaries;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<double>> values;
  for (const auto& row : rows) {
    auto [it, inserted] = index.try_emplace(row.method, summaries.size());
    if (inserted) {
      summaries.push_back(MethodSummary{row.method, 0.0, 0.0, 0});
      values.emplace_back();
    }
    values[it->second].push_back(row.validation_auc);
  }
  for (std::size_t m = 0; m < summaries.size(); ++m) {
    const auto& auc = values[m];
    const double n = static_cast<double>(auc.size());
    double mean = 0.0;
    for (double v : auc) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : auc) ss += (v - mean) * (v - mean);
    summaries[m].mean_auc = mean;
    summaries[m].sd_auc = auc.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    summaries[m].repetitions = static_cast<int>(auc.size());
  }
  return summaries;
}

BenchmarkResult simulate_benchmark(const SimDesign& design,
                                   const std::vector<std::string>& methods,
                                   const BenchmarkOptions& options) {
  if (options.repetitions < 1) {
    throw std::invalid_argument("at least one repetition is required");
  }
  const auto classifiers = build_methods(methods, options.method_options);
  const SimDesign validation_design = design.with_n(options.validation_n);

  BenchmarkResult result;
  result.rows.resize(static_cast<std::size_t>(options.repetitions) *
                     methods.size());

  run_parallel(options.repetitions, options.threads, [&](int rep) {
    RngStream data_rng(
        derive_seed(options.master_seed, static_cast<std::uint64_t>(rep), 0));
    auto [train, mask] = sample_dataset(design, data_rng);
    auto [validation, unused_mask] =
        sample_dataset(validation_design, data_rng);

    RngStream fold_rng(
        derive_seed(options.master_seed, static_cast<std::uint64_t>(rep), 1));
    const FoldAssignment folds =
        stratified_folds(train, options.folds, fold_rng);

    for (std::size_t m = 0; m < classifiers.size(); ++m) {
      BenchmarkRow row = benchmark_split(train, validation, *classifiers[m],
                                         folds, mask);
      row.repetition = rep;
      result.rows[static_cast<std::size_t>(rep) * classifiers.size() + m] =
          std::move(row);
    }
  });
  return result;
}

BenchmarkResult rdcv(const Dataset& ds, const std::vector<std::string>& methods,
                     const RdcvOptions& options) {
  if (options.repetitions < 1) {
    throw std::invalid_argument("at least one repetition is required");
  }
  const auto classifiers = build_methods(methods, options.method_options);

  BenchmarkResult result;
  result.rows.resize(static_cast<std::size_t>(options.repetitions) *
                     methods.size());

  run_parallel(options.repetitions, options.threads, [&](int rep) {
    RngStream outer_rng(
        derive_seed(options.master_seed, static_cast<std::uint64_t>(rep), 0));
    const FoldAssignment outer =
        stratified_folds(ds, options.outer_folds, outer_rng);
    const auto outer_members = outer.members();

    struct MethodAccumulator {
      double auc_sum = 0.0;
      double selected_sum = 0.0;
      double sens_sum = 0.0, spec_sum = 0.0, acc_sum = 0.0;
      bool sens_defined = true;
      std::map<std::string, int> chosen_counts;
      std::vector<std::string> chosen_order;
    };
    std::vector<MethodAccumulator> accumulators(classifiers.size());

    for (int f = 0; f < options.outer_folds; ++f) {
      const std::vector<int> train_rows = outer.complement(f);
      const Dataset outer_train = ds.subset(train_rows);
      RngStream inner_rng(derive_seed(options.master_seed,
                                      static_cast<std::uint64_t>(rep),
                                      2 + static_cast<std::uint64_t>(f)));
      const FoldAssignment inner =
          stratified_folds(outer_train, options.inner_folds, inner_rng);
      const auto& test_rows = outer_members[static_cast<std::size_t>(f)];
      const std::vector<int> test_labels = fold_labels(ds, test_rows);

      for (std::size_t m = 0; m < classifiers.size(); ++m) {
        const Classifier& method = *classifiers[m];
        const auto grid = method.tuning_grid(outer_train, min_fit_size(inner));
        const TuneResult tuned = kfold_tune(outer_train, method, grid, inner);
        const auto model = method.fit(outer_train, tuned.chosen);
        const Eigen::VectorXd scores = score_rows(*model, ds, test_rows);

        MethodAccumulator& acc = accumulators[m];
        acc.auc_sum +=
            roc_curve({scores.data(), static_cast<std::size_t>(scores.size())},
                      test_labels)
                .auc;
        const auto selected =
            model->selected_biomarkers(ds.num_biomarkers());
        acc.selected_sum += selected_total(selected);
        if (options.relevance.has_value()) {
          const SelectionReport report =
              selection_performance(selected, options.relevance->relevant);
          acc.sens_sum += report.sensitivity;
          acc.spec_sum += report.specificity;
          acc.acc_sum += report.accuracy;
          acc.sens_defined = acc.sens_defined && report.sensitivity_defined;
        }
        auto [it, inserted] = acc.chosen_counts.try_emplace(
            tuned.chosen.label, 0);
        if (inserted) acc.chosen_order.push_back(tuned.chosen.label);
        ++it->second;
      }
    }

    const double k = static_cast<double>(options.outer_folds);
    for (std::size_t m = 0; m < classifiers.size(); ++m) {
      const MethodAccumulator& acc = accumulators[m];
      BenchmarkRow row;
      row.method = classifiers[m]->name();
      row.repetition = rep;
      row.validation_auc = acc.auc_sum / k;
      row.selected_count = acc.selected_sum / k;
      // Most frequently chosen setting; first seen wins ties.
      int best_count = -1;
      for (const auto& label : acc.chosen_order) {
        const int count = acc.chosen_counts.at(label);
        if (count > best_count) {
          best_count = count;
          row.chosen_params = label;
        }
      }
      if (options.relevance.has_value()) {
        SelectionReport report;
        report.sensitivity = acc.sens_sum / k;
        report.specificity = acc.spec_sum / k;
        report.accuracy = acc.acc_sum / k;
        report.sensitivity_defined = acc.sens_defined;
        row.selection = report;
      }
      result.rows[static_cast<std::size_t>(rep) * classifiers.size() + m] =
          std::move(row);
    }
  });
  return result;
}

void write_rows_csv(const BenchmarkResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  out << "method,repetition,chosen_params,validation_auc,selected_count,"
         "selection_sensitivity,selection_specificity,selection_accuracy\n";
  for (const auto& row : result.rows) {
    out << row.method << ',' << row.repetition << ",\"" << row.chosen_params
        << "\"," << fmt(row.validation_auc) << ',' << fmt(row.selected_count)
        << ',';
    if (row.selection.has_value()) {
      const auto& sel = *row.selection;
      out << (sel.sensitivity_defined ? fmt(sel.sensitivity) : "") << ','
          << fmt(sel.specificity) << ',' << fmt(sel.accuracy);
    } else {
      out << ",,";
    }
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

void write_summary_csv(const BenchmarkResult& result,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  out << "method,mean_auc,sd_auc,repetitions\n";
  for (const auto& summary : result.summarize()) {
    out << summary.method << ',' << fmt(summary.mean_auc) << ','
        << fmt(summary.sd_auc) << ',' << summary.repetitions << '\n';
  }
  if (!out) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

}  // namespace qbplab
