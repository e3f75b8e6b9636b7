#include "qbplab/qbp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace qbplab {

namespace {

double pick_quantile(const EmpiricalDistribution& dist, double p,
                     QuantileRule rule) {
  return rule == QuantileRule::order_statistic ? dist.quantile_lower(p)
                                               : dist.quantile(p);
}

void check_sorted(const std::vector<double>& v, bool increasing,
                  const char* what) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (increasing ? v[i] < v[i - 1] : v[i] > v[i - 1]) {
      throw std::invalid_argument(std::string(what) + " must be " +
                                  (increasing ? "nondecreasing" : "decreasing"));
    }
  }
}

}  // namespace

void QbpConfig::validate() const {
  if (left_props.empty() || left_props.size() != right_props.size()) {
    throw std::invalid_argument(
        "left/right proportion lists must be nonempty and of equal length");
  }
  for (std::size_t s = 0; s < left_props.size(); ++s) {
    if (left_props[s] <= 0.0 || left_props[s] >= 0.5) {
      throw std::invalid_argument("left proportions must lie in (0, 0.5)");
    }
    if (right_props[s] <= 0.5 || right_props[s] >= 1.0) {
      throw std::invalid_argument("right proportions must lie in (0.5, 1)");
    }
  }
  check_sorted(left_props, /*increasing=*/false, "left proportions");
  check_sorted(right_props, /*increasing=*/true, "right proportions");
  if (ratio_bounds.size() != left_props.size()) {
    throw std::invalid_argument(
        "ratio bound count must match proportions per tail");
  }
  for (double b : ratio_bounds) {
    if (b <= 1.0) {
      throw std::invalid_argument("every exceedratio bound must exceed 1");
    }
  }
  if (max_scores.size() != left_props.size()) {
    throw std::invalid_argument(
        "max score count must match proportions per tail");
  }
  if (max_scores.front() <= 0.0) {
    throw std::invalid_argument("maximal interval scores must be positive");
  }
  check_sorted(max_scores, /*increasing=*/true, "maximal interval scores");
  for (double w : weights) {
    if (w < 0.0 || std::isnan(w)) {
      throw std::invalid_argument("biomarker weights must be nonnegative");
    }
  }
}

bool BiomarkerFit::selected() const {
  const auto nonzero = [](const std::vector<double>& v) {
    return std::any_of(v.begin(), v.end(), [](double s) { return s != 0.0; });
  };
  return nonzero(left.interval_scores) || nonzero(right.interval_scores);
}

std::pair<Predominance, Predominance> determine_predominance(
    const EmpiricalDistribution& controls, const EmpiricalDistribution& cases,
    double left_anchor, double right_anchor, QuantileRule rule) {
  const double left_ctrl = pick_quantile(controls, left_anchor, rule);
  const double left_case = pick_quantile(cases, left_anchor, rule);
  const double right_ctrl = pick_quantile(controls, right_anchor, rule);
  const double right_case = pick_quantile(cases, right_anchor, rule);

  Predominance left = Predominance::none;
  if (left_ctrl > left_case) {
    left = Predominance::cases;  // cases reach further left
  } else if (left_ctrl < left_case) {
    left = Predominance::controls;
  }
  Predominance right = Predominance::none;
  if (right_ctrl > right_case) {
    right = Predominance::controls;  // controls reach further right
  } else if (right_ctrl < right_case) {
    right = Predominance::cases;
  }
  return {left, right};
}

std::vector<double> compute_cutpoints(
    const EmpiricalDistribution& non_predominant, std::span<const double> props,
    QuantileRule rule) {
  std::vector<double> cutpoints;
  cutpoints.reserve(props.size());
  for (double p : props) {
    cutpoints.push_back(pick_quantile(non_predominant, p, rule));
  }
  return cutpoints;
}

std::vector<double> exceed_ratios(const EmpiricalDistribution& predominant,
                                  std::span<const double> cutpoints,
                                  std::span<const double> props, Tail side) {
  if (cutpoints.size() != props.size()) {
    throw std::invalid_argument("cutpoint/proportion length mismatch");
  }
  std::vector<double> ratios;
  ratios.reserve(props.size());
  for (std::size_t s = 0; s < props.size(); ++s) {
    const double mass = side == Tail::left
                            ? predominant.ecdf(cutpoints[s])
                            : 1.0 - predominant.ecdf(cutpoints[s]);
    const double nominal =
        side == Tail::left ? props[s] : 1.0 - props[s];
    ratios.push_back(mass / nominal);
  }
  return ratios;
}

std::vector<std::uint8_t> exceed_scores(std::span<const double> ratios,
                                        std::span<const double> bounds) {
  if (ratios.size() != bounds.size()) {
    throw std::invalid_argument("ratio/bound length mismatch");
  }
  std::vector<std::uint8_t> flags(ratios.size());
  for (std::size_t s = 0; s < ratios.size(); ++s) {
    flags[s] = ratios[s] >= bounds[s] ? 1 : 0;
  }
  return flags;
}

std::vector<double> interval_scores(std::span<const std::uint8_t> exceed,
                                    std::span<const double> max_scores,
                                    Predominance predominant) {
  if (exceed.size() != max_scores.size()) {
    throw std::invalid_argument("exceedscore/max-score length mismatch");
  }
  std::vector<double> scores(exceed.size(), 0.0);
  if (predominant == Predominance::none) {
    return scores;
  }
  const double sign = predominant == Predominance::cases ? 1.0 : -1.0;
  double running_max = 0.0;
  for (std::size_t s = 0; s < exceed.size(); ++s) {
    if (exceed[s]) {
      running_max = std::max(running_max, max_scores[s]);
    }
    scores[s] = sign * running_max;
  }
  return scores;
}

TailProfile compute_tail_profile(const Dataset& ds, const QbpConfig& config) {
  config.validate();
  require_both_classes(ds);
  if (!config.weights.empty() &&
      static_cast<Eigen::Index>(config.weights.size()) !=
          ds.num_biomarkers()) {
    throw std::invalid_argument("weight count does not match biomarker count");
  }

  TailProfile profile;
  profile.names = ds.names();
  profile.tails.reserve(static_cast<std::size_t>(ds.num_biomarkers()));

  for (Eigen::Index k = 0; k < ds.num_biomarkers(); ++k) {
    std::vector<double> control_values;
    std::vector<double> case_values;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      if (ds.is_missing(i, k)) continue;
      (ds.labels()[static_cast<std::size_t>(i)] == 0 ? control_values
                                                     : case_values)
          .push_back(ds.value(i, k));
    }
    if (control_values.size() < 2 || case_values.size() < 2) {
      throw std::invalid_argument(
          "biomarker '" + ds.names()[static_cast<std::size_t>(k)] +
          "' has fewer than 2 non-missing values in one class");
    }
    const EmpiricalDistribution controls(std::move(control_values));
    const EmpiricalDistribution cases(std::move(case_values));

    const auto [left_pred, right_pred] = determine_predominance(
        controls, cases, config.left_props.front(), config.right_props.front(),
        config.quantile_rule);

    const auto pick_group = [&](Predominance which) -> const auto& {
      return which == Predominance::cases ? cases : controls;
    };
    const auto other_group = [&](Predominance which) -> const auto& {
      return which == Predominance::cases ? controls : cases;
    };

    TailStats left;
    left.predominant = left_pred;
    if (left_pred != Predominance::none) {
      left.cutpoints = compute_cutpoints(other_group(left_pred),
                                         config.left_props,
                                         config.quantile_rule);
      left.exceed_ratios = exceed_ratios(pick_group(left_pred), left.cutpoints,
                                         config.left_props, Tail::left);
    } else {
      // Tail carries no score; cutpoints kept only so interval lookup
      // stays total. Controls are the arbitrary reference.
      left.cutpoints = compute_cutpoints(controls, config.left_props,
                                         config.quantile_rule);
      left.exceed_ratios.assign(config.left_props.size(), 0.0);
    }

    TailStats right;
    right.predominant = right_pred;
    if (right_pred != Predominance::none) {
      right.cutpoints = compute_cutpoints(other_group(right_pred),
                                          config.right_props,
                                          config.quantile_rule);
      right.exceed_ratios =
          exceed_ratios(pick_group(right_pred), right.cutpoints,
                        config.right_props, Tail::right);
    } else {
      right.cutpoints = compute_cutpoints(controls, config.right_props,
                                          config.quantile_rule);
      right.exceed_ratios.assign(config.right_props.size(), 0.0);
    }

    if (left.cutpoints.front() >= right.cutpoints.front()) {
      profile.warnings.push_back(
          "biomarker '" + ds.names()[static_cast<std::size_t>(k)] +
          "': tails overlap; left tail takes precedence in scoring");
    }
    profile.tails.emplace_back(std::move(left), std::move(right));
  }
  return profile;
}

FittedQbp apply_scoring(const TailProfile& profile, const QbpConfig& config) {
  config.validate();
  FittedQbp model;
  model.config = config;
  model.warnings = profile.warnings;
  model.biomarkers.reserve(profile.tails.size());
  for (std::size_t k = 0; k < profile.tails.size(); ++k) {
    const auto& [left_stats, right_stats] = profile.tails[k];
    BiomarkerFit fit;
    fit.name = profile.names[k];
    fit.weight = config.weights.empty() ? 1.0 : config.weights[k];

    const auto build_tail = [&](const TailStats& stats) {
      TailFit tail;
      tail.predominant = stats.predominant;
      tail.cutpoints = stats.cutpoints;
      tail.exceed_ratios = stats.exceed_ratios;
      if (stats.predominant == Predominance::none) {
        tail.exceed_scores.assign(stats.exceed_ratios.size(), 0);
        tail.interval_scores.assign(stats.exceed_ratios.size(), 0.0);
      } else {
        tail.exceed_scores =
            exceed_scores(stats.exceed_ratios, config.ratio_bounds);
        tail.interval_scores = interval_scores(
            tail.exceed_scores, config.max_scores, stats.predominant);
      }
      return tail;
    };
    fit.left = build_tail(left_stats);
    fit.right = build_tail(right_stats);
    model.biomarkers.push_back(std::move(fit));
  }
  return model;
}

FittedQbp fit_qbp(const Dataset& ds, const QbpConfig& config) {
  return apply_scoring(compute_tail_profile(ds, config), config);
}

double FittedQbp::disease_score(Eigen::Index k, double x) const {
  if (std::isnan(x)) {
    return 0.0;  // missing value contributes a neutral score
  }
  const BiomarkerFit& fit = biomarkers[static_cast<std::size_t>(k)];

  // Left tail intervals are right-closed: x belongs to the interval of the
  // outermost cutpoint it does not exceed. Ties between equal cutpoints
  // collapse the inner (empty) interval.
  const auto& lcuts = fit.left.cutpoints;
  if (x <= lcuts.front()) {
    std::size_t pos = 0;
    for (std::size_t j = 0; j < lcuts.size(); ++j) {
      if (x <= lcuts[j]) pos = j;
    }
    return fit.left.interval_scores[pos] * fit.weight;
  }

  // Right tail intervals are left-closed.
  const auto& rcuts = fit.right.cutpoints;
  if (x >= rcuts.front()) {
    std::size_t pos = 0;
    for (std::size_t j = 0; j < rcuts.size(); ++j) {
      if (x >= rcuts[j]) pos = j;
    }
    return fit.right.interval_scores[pos] * fit.weight;
  }

  return 0.0;  // central interval
}

double FittedQbp::total_disease_score(const Eigen::VectorXd& subject) const {
  if (subject.size() != static_cast<Eigen::Index>(biomarkers.size())) {
    throw std::invalid_argument("subject length does not match biomarker count");
  }
  double total = 0.0;
  for (Eigen::Index k = 0; k < subject.size(); ++k) {
    total += disease_score(k, subject(k));
  }
  return total;
}

std::vector<std::uint8_t> FittedQbp::selected_biomarkers() const {
  std::vector<std::uint8_t> flags(biomarkers.size());
  for (std::size_t k = 0; k < biomarkers.size(); ++k) {
    flags[k] = biomarkers[k].selected() ? 1 : 0;
  }
  return flags;
}

namespace {

using nlohmann::json;

json tail_to_json(const TailFit& tail) {
  const char* pred = tail.predominant == Predominance::cases      ? "cases"
                     : tail.predominant == Predominance::controls ? "controls"
                                                                  : "none";
  return json{{"predominant", pred},
              {"cutpoints", tail.cutpoints},
              {"exceed_ratios", tail.exceed_ratios},
              {"exceed_scores", tail.exceed_scores},
              {"interval_scores", tail.interval_scores}};
}

TailFit tail_from_json(const json& j) {
  TailFit tail;
  const std::string pred = j.at("predominant").get<std::string>();
  tail.predominant = pred == "cases"      ? Predominance::cases
                     : pred == "controls" ? Predominance::controls
                                          : Predominance::none;
  tail.cutpoints = j.at("cutpoints").get<std::vector<double>>();
  tail.exceed_ratios = j.at("exceed_ratios").get<std::vector<double>>();
  tail.exceed_scores = j.at("exceed_scores").get<std::vector<std::uint8_t>>();
  tail.interval_scores = j.at("interval_scores").get<std::vector<double>>();
  return tail;
}

}  // namespace

std::string to_json_string(const FittedQbp& model) {
  json biomarkers = json::array();
  for (const auto& fit : model.biomarkers) {
    biomarkers.push_back(json{{"name", fit.name},
                              {"weight", fit.weight},
                              {"left", tail_to_json(fit.left)},
                              {"right", tail_to_json(fit.right)}});
  }
  const json doc{
      {"schema", "qbplab.qbp_model"},
      {"version", 1},
      {"config",
       {{"left_props", model.config.left_props},
        {"right_props", model.config.right_props},
        {"ratio_bounds", model.config.ratio_bounds},
        {"max_scores", model.config.max_scores},
        {"weights", model.config.weights},
        {"quantile_rule",
         model.config.quantile_rule == QuantileRule::order_statistic
             ? "order_statistic"
             : "interpolated"}}},
      {"biomarkers", biomarkers},
      {"warnings", model.warnings}};
  return doc.dump(2);
}

FittedQbp qbp_from_json_string(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.at("schema").get<std::string>() != "qbplab.qbp_model" ||
      doc.at("version").get<int>() != 1) {
    throw std::runtime_error("unsupported qbp model document");
  }
  FittedQbp model;
  const json& cfg = doc.at("config");
  model.config.left_props = cfg.at("left_props").get<std::vector<double>>();
  model.config.right_props = cfg.at("right_props").get<std::vector<double>>();
  model.config.ratio_bounds =
      cfg.at("ratio_bounds").get<std::vector<double>>();
  model.config.max_scores = cfg.at("max_scores").get<std::vector<double>>();
  model.config.weights = cfg.at("weights").get<std::vector<double>>();
  model.config.quantile_rule =
      cfg.at("quantile_rule").get<std::string>() == "interpolated"
          ? QuantileRule::interpolated
          : QuantileRule::order_statistic;
  for (const auto& item : doc.at("biomarkers")) {
    BiomarkerFit fit;
    fit.name = item.at("name").get<std::string>();
    fit.weight = item.at("weight").get<double>();
    fit.left = tail_from_json(item.at("left"));
    fit.right = tail_from_json(item.at("right"));
    model.biomarkers.push_back(std::move(fit));
  }
  model.warnings = doc.at("warnings").get<std::vector<std::string>>();
  return model;
}

}  // namespace qbplab
