#include "qbplab/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qbplab {

namespace {

std::pair<int, int> class_counts(std::span<const int> labels) {
  int controls = 0;
  int cases = 0;
  for (int y : labels) {
    if (y == 0) {
      ++controls;
    } else if (y == 1) {
      ++cases;
    } else {
      throw std::invalid_argument("labels must be 0 or 1");
    }
  }
  if (controls == 0 || cases == 0) {
    throw std::invalid_argument(
        "ROC needs at least one case and one control");
  }
  return {controls, cases};
}

void check_sizes(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("score/label size mismatch");
  }
  for (double s : scores) {
    if (std::isnan(s)) {
      throw std::invalid_argument("scores must not be NaN");
    }
  }
}

std::string format_double(double v) {
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

}  // namespace

RocCurve roc_curve(std::span<const double> scores,
                   std::span<const int> labels) {
  check_sizes(scores, labels);
  const auto [n_controls, n_cases] = class_counts(labels);

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  int tp = 0;
  int fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    // Sweep over whole tie groups so the curve has one point per distinct
    // score; this makes the trapezoid area equal the rank statistic exactly.
    while (i < order.size() && scores[order[i]] == threshold) {
      if (labels[order[i]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    curve.points.emplace_back(static_cast<double>(fp) / n_controls,
                              static_cast<double>(tp) / n_cases);
  }

  double area = 0.0;
  for (std::size_t p = 1; p < curve.points.size(); ++p) {
    const auto& [x0, y0] = curve.points[p - 1];
    const auto& [x1, y1] = curve.points[p];
    area += (x1 - x0) * 0.5 * (y0 + y1);
  }
  curve.auc = area;
  return curve;
}

double auc_rank(std::span<const double> scores, std::span<const int> labels) {
  check_sizes(scores, labels);
  const auto [n_controls, n_cases] = class_counts(labels);

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Midranks over tie groups; Wilcoxon rank-sum of the cases.
  double case_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) {
        case_rank_sum += midrank;
      }
    }
    i = j;
  }
  const double n1 = static_cast<double>(n_cases);
  const double u = case_rank_sum - n1 * (n1 + 1.0) / 2.0;
  return u / (n1 * static_cast<double>(n_controls));
}

std::pair<double, double> confusion_at_threshold(std::span<const double> scores,
                                                 std::span<const int> labels,
                                                 double threshold) {
  check_sizes(scores, labels);
  const auto [n_controls, n_cases] = class_counts(labels);
  int tp = 0;
  int tn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted_case = scores[i] >= threshold;
    if (labels[i] == 1 && predicted_case) ++tp;
    if (labels[i] == 0 && !predicted_case) ++tn;
  }
  return {static_cast<double>(tp) / n_cases,
          static_cast<double>(tn) / n_controls};
}

SelectionReport selection_performance(std::span<const std::uint8_t> selected,
                                      std::span<const std::uint8_t> relevant) {
  if (selected.size() != relevant.size() || selected.empty()) {
    throw std::invalid_argument("selected/relevant size mismatch");
  }
  int tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < selected.size(); ++k) {
    const bool sel = selected[k] != 0;
    const bool rel = relevant[k] != 0;
    if (sel && rel) ++tp;
    if (sel && !rel) ++fp;
    if (!sel && rel) ++fn;
    if (!sel && !rel) ++tn;
  }
  SelectionReport report;
  if (tp + fn == 0) {
    report.sensitivity = std::numeric_limits<double>::quiet_NaN();
    report.sensitivity_defined = false;
  } else {
    report.sensitivity = static_cast<double>(tp) / (tp + fn);
  }
  report.specificity =
      tn + fp == 0 ? 1.0 : static_cast<double>(tn) / (tn + fp);
  report.accuracy =
      static_cast<double>(tp + tn) / static_cast<double>(selected.size());
  return report;
}

void write_roc_csv(const RocCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  out << "# auc=" << format_double(curve.auc) << '\n';
  out << "fpr,tpr\n";
  for (const auto& [fpr, tpr] : curve.points) {
    out << format_double(fpr) << ',' << format_double(tpr) << '\n';
  }
  if (!out) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

}  // namespace qbplab
