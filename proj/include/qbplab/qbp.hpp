#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qbplab/dataset.hpp"
#include "qbplab/quantiles.hpp"

namespace qbplab {

enum class Tail { left, right };

// Group whose tail quantile is more extreme on a given side.
enum class Predominance { controls, cases, none };

// Which quantile estimator the classifier uses internally. The order
// statistic rule is the default: it makes every fitted characteristic, and
// therefore every disease score, exactly invariant under strictly
// increasing transformations of a biomarker.
enum class QuantileRule { order_statistic, interpolated };

struct QbpConfig {
  // Tail proportions, innermost first. Left entries < 0.5 and decreasing,
  // right entries > 0.5 and increasing; by default symmetric.
  std::vector<double> left_props{0.10, 0.05, 0.01};
  std::vector<double> right_props{0.90, 0.95, 0.99};

  // Lower bounds on the exceedratios, innermost cutpoint first; each > 1.
  std::vector<double> ratio_bounds{2.0, 3.0, 5.0};

  // Maximal interval scores, innermost interval first; positive and
  // nondecreasing, so deeper tail intervals never score less.
  std::vector<double> max_scores{1.0, 2.0, 3.0};

  // Per-biomarker weights; empty means all ones.
  std::vector<double> weights;

  QuantileRule quantile_rule = QuantileRule::order_statistic;

  std::size_t proportions_per_tail() const { return left_props.size(); }
  void validate() const;
};

// Fitted characteristics of one tail of one biomarker. Vectors are indexed
// by proportion position, innermost first; interval_scores[j] belongs to
// the interval between cutpoint j and cutpoint j+1 (the last one extends
// to +-infinity).
struct TailFit {
  Predominance predominant = Predominance::none;
  std::vector<double> cutpoints;
  std::vector<double> exceed_ratios;
  std::vector<std::uint8_t> exceed_scores;
  std::vector<double> interval_scores;
};

struct BiomarkerFit {
  std::string name;
  double weight = 1.0;
  TailFit left;
  TailFit right;

  bool selected() const;
};

// Complete fitted classifier: per-biomarker tail characteristics plus the
// configuration they were fitted under. Immutable and shareable.
struct FittedQbp {
  QbpConfig config;
  std::vector<BiomarkerFit> biomarkers;
  std::vector<std::string> warnings;

  // Signed score of one biomarker value; missing (NaN) scores 0.
  double disease_score(Eigen::Index k, double x) const;

  // Sum of disease scores over all biomarkers; higher means more case-like.
  double total_disease_score(const Eigen::VectorXd& subject) const;

  std::vector<std::uint8_t> selected_biomarkers() const;
};

// --- individual fitting steps (exposed for direct verification) ---

// Compares the two groups' tail quantiles at the anchor proportions.
// Left tail: the group reaching further left (smaller quantile) is
// predominant; right tail: the group reaching further right.
std::pair<Predominance, Predominance> determine_predominance(
    const EmpiricalDistribution& controls, const EmpiricalDistribution& cases,
    double left_anchor, double right_anchor, QuantileRule rule);

// Cutpoints are the non-predominant group's quantiles at the given
// proportions.
std::vector<double> compute_cutpoints(
    const EmpiricalDistribution& non_predominant, std::span<const double> props,
    QuantileRule rule);

// Ratio of the predominant group's tail mass beyond each cutpoint to the
// nominal tail proportion.
std::vector<double> exceed_ratios(const EmpiricalDistribution& predominant,
                                  std::span<const double> cutpoints,
                                  std::span<const double> props, Tail side);

// Binary flags: ratio at position s clears its configured lower bound.
std::vector<std::uint8_t> exceed_scores(std::span<const double> ratios,
                                        std::span<const double> bounds);

// Signed interval scores: magnitude is the running maximum of
// max_scores[u] * exceed[u] (nondecreasing moving outward), sign positive
// when the tail's predominant group is the cases.
std::vector<double> interval_scores(std::span<const std::uint8_t> exceed,
                                    std::span<const double> max_scores,
                                    Predominance predominant);

// --- fitting ---

// Tail characteristics that depend only on the data and the proportion
// grid, not on ratio bounds / max scores / weights. Lets a tuning loop
// share the expensive part across candidate (bounds, scores) settings.
struct TailStats {
  Predominance predominant = Predominance::none;
  std::vector<double> cutpoints;
  std::vector<double> exceed_ratios;
};

struct TailProfile {
  std::vector<std::string> names;
  std::vector<std::pair<TailStats, TailStats>> tails;  // (left, right)
  std::vector<std::string> warnings;
};

TailProfile compute_tail_profile(const Dataset& ds, const QbpConfig& config);
FittedQbp apply_scoring(const TailProfile& profile, const QbpConfig& config);

// Full fit: per biomarker and tail, predominance -> cutpoints ->
// exceedratios -> exceedscores -> interval scores. Quantiles use
// non-missing values only; each class needs >= 2 of them per biomarker.
FittedQbp fit_qbp(const Dataset& ds, const QbpConfig& config);

// Versioned JSON document for audit and reload.
std::string to_json_string(const FittedQbp& model);
FittedQbp qbp_from_json_string(const std::string& text);

}  // namespace qbplab
