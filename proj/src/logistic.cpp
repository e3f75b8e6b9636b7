#include "qbplab/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace qbplab {

namespace {

double sigmoid(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

// log(1 + e^eta), overflow-safe.
double softplus(double eta) {
  if (eta > 35.0) return eta;
  if (eta < -35.0) return 0.0;
  return std::log1p(std::exp(eta));
}

double log_likelihood_eta(const Eigen::VectorXd& eta,
                          const Eigen::VectorXd& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += y(i) * eta(i) - softplus(eta(i));
  }
  return ll;
}

double soft_threshold(double value, double threshold) {
  if (value > threshold) return value - threshold;
  if (value < -threshold) return value + threshold;
  return 0.0;
}

Eigen::VectorXd labels_as_vector(const Dataset& ds) {
  Eigen::VectorXd y(ds.n());
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    y(i) = static_cast<double>(ds.labels()[static_cast<std::size_t>(i)]);
  }
  return y;
}

// (lambda1, lambda2) such that lambda * P(beta) =
// lambda1 * sum|b| + lambda2 * sum b^2.
std::pair<double, double> penalty_factors(Penalty penalty, double lambda,
                                          double alpha) {
  switch (penalty) {
    case Penalty::none:
      return {0.0, 0.0};
    case Penalty::lasso:
      return {lambda, 0.0};
    case Penalty::elastic_net:
      return {lambda * alpha, lambda * (1.0 - alpha) / 2.0};
    case Penalty::ridge:
      return {0.0, lambda};
  }
  return {0.0, 0.0};
}

struct StandardizedDesign {
  Eigen::MatrixXd x;              // n x (active count)
  std::vector<Eigen::Index> active;  // original column indices
  Eigen::VectorXd mean;           // per original column
  Eigen::VectorXd sd;
};

StandardizedDesign build_standardized(const Dataset& ds) {
  StandardizedDesign design;
  const Eigen::MatrixXd& raw = ds.features();
  const Eigen::Index n = raw.rows();
  design.mean = raw.colwise().mean();
  design.sd.resize(raw.cols());
  for (Eigen::Index k = 0; k < raw.cols(); ++k) {
    const double ss = (raw.col(k).array() - design.mean(k)).square().sum();
    design.sd(k) = std::sqrt(ss / static_cast<double>(n - 1));
    if (design.sd(k) > 0.0) {
      design.active.push_back(k);
    }
  }
  design.x.resize(n, static_cast<Eigen::Index>(design.active.size()));
  for (std::size_t a = 0; a < design.active.size(); ++a) {
    const Eigen::Index k = design.active[a];
    design.x.col(static_cast<Eigen::Index>(a)) =
        (raw.col(k).array() - design.mean(k)) / design.sd(k);
  }
  return design;
}

}  // namespace

std::string penalty_name(Penalty p) {
  switch (p) {
    case Penalty::none: return "none";
    case Penalty::lasso: return "lasso";
    case Penalty::elastic_net: return "elastic_net";
    case Penalty::ridge: return "ridge";
  }
  return "none";
}

double LogisticModel::score(const Eigen::VectorXd& x) const {
  return sigmoid(linear_predictor(x));
}

std::vector<std::uint8_t> LogisticModel::selected() const {
  std::vector<std::uint8_t> flags(
      static_cast<std::size_t>(coefficients.size()));
  for (Eigen::Index k = 0; k < coefficients.size(); ++k) {
    flags[static_cast<std::size_t>(k)] = coefficients(k) != 0.0 ? 1 : 0;
  }
  return flags;
}

LogisticModel fit_logistic(const Dataset& ds) {
  require_complete(ds, "logistic regression");
  require_both_classes(ds);
  const Eigen::Index n = ds.n();
  const Eigen::Index r = ds.num_biomarkers();
  const Eigen::VectorXd y = labels_as_vector(ds);

  // Centering keeps the normal equations well scaled and pins coefficients
  // of constant columns at zero.
  const Eigen::VectorXd mean = ds.features().colwise().mean();
  std::vector<Eigen::Index> active;
  for (Eigen::Index k = 0; k < r; ++k) {
    if ((ds.features().col(k).array() - mean(k)).abs().maxCoeff() > 0.0) {
      active.push_back(k);
    }
  }
  const Eigen::Index ra = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd design(n, ra + 1);
  design.col(0).setOnes();
  for (Eigen::Index a = 0; a < ra; ++a) {
    design.col(a + 1) = ds.features().col(active[static_cast<std::size_t>(a)])
                            .array() -
                        mean(active[static_cast<std::size_t>(a)]);
  }

  const double prevalence = y.mean();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(ra + 1);
  beta(0) = std::log(prevalence / (1.0 - prevalence));

  Eigen::VectorXd eta = design * beta;
  double ll = log_likelihood_eta(eta, y);
  bool converged = false;
  bool polish_done = false;
  int iterations = 0;

  while (iterations < 100) {
    ++iterations;
    Eigen::VectorXd p(n);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = sigmoid(eta(i));
      w(i) = std::max(p(i) * (1.0 - p(i)), 1e-10);
    }
    const Eigen::VectorXd gradient = design.transpose() * (y - p);
    const Eigen::MatrixXd hessian =
        design.transpose() * w.asDiagonal() * design;
    const Eigen::VectorXd delta = hessian.ldlt().solve(gradient);

    // Step halving keeps the log-likelihood nondecreasing.
    double step = 1.0;
    Eigen::VectorXd beta_next;
    Eigen::VectorXd eta_next;
    double ll_next = ll;
    for (int h = 0; h < 40; ++h) {
      beta_next = beta + step * delta;
      eta_next = design * beta_next;
      ll_next = log_likelihood_eta(eta_next, y);
      if (ll_next >= ll - 1e-12) break;
      step *= 0.5;
    }
    const double improvement = ll_next - ll;
    beta = beta_next;
    eta = eta_next;
    ll = ll_next;

    if (improvement < 1e-10) {
      if (polish_done) {
        converged = true;
        break;
      }
      polish_done = true;  // one extra Newton step sharpens the optimum
    } else {
      polish_done = false;
    }
  }
  // Fitted probabilities pinned at 0/1 mean the likelihood is flattening
  // along a separating direction, not at an interior maximum.
  if (converged && eta.cwiseAbs().maxCoeff() > 30.0) {
    converged = false;
  }

  LogisticModel model;
  model.penalty = Penalty::none;
  model.converged = converged;
  model.iterations = iterations;
  model.coefficients = Eigen::VectorXd::Zero(r);
  double intercept = beta(0);
  for (Eigen::Index a = 0; a < ra; ++a) {
    const Eigen::Index k = active[static_cast<std::size_t>(a)];
    model.coefficients(k) = beta(a + 1);
    intercept -= beta(a + 1) * mean(k);
  }
  model.intercept = intercept;
  return model;
}

LogisticModel fit_penalized_logistic(const Dataset& ds, Penalty penalty,
                                     double lambda, double alpha,
                                     PenalizedFitInfo* info,
                                     const LogisticModel* warm_start) {
  if (lambda < 0.0) {
    throw std::invalid_argument("lambda must be nonnegative");
  }
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("alpha must lie in [0, 1]");
  }
  require_complete(ds, "penalized logistic regression");
  require_both_classes(ds);

  const Eigen::Index n = ds.n();
  const Eigen::VectorXd y = labels_as_vector(ds);
  const StandardizedDesign design = build_standardized(ds);
  const Eigen::Index ra = design.x.cols();
  const auto [lambda1, lambda2] = penalty_factors(penalty, lambda, alpha);

  const double prevalence = y.mean();
  double beta0 = std::log(prevalence / (1.0 - prevalence));
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(ra);
  if (warm_start != nullptr && warm_start->coefficients.size() ==
                                   static_cast<Eigen::Index>(
                                       ds.num_biomarkers())) {
    beta0 = warm_start->intercept;
    for (Eigen::Index a = 0; a < ra; ++a) {
      const Eigen::Index k = design.active[static_cast<std::size_t>(a)];
      beta(a) = warm_start->coefficients(k) * design.sd(k);
      beta0 += warm_start->coefficients(k) * design.mean(k);
    }
  }

  const auto objective = [&](const Eigen::VectorXd& eta) {
    return log_likelihood_eta(eta, y) - lambda1 * beta.lpNorm<1>() -
           lambda2 * beta.squaredNorm();
  };

  // Cyclic coordinate descent on the weighted quadratic approximation at
  // the current iterate. With weights p(1-p) this is the usual fast IRLS
  // step; with the constant weight 1/4 (the global curvature bound of the
  // logistic log-likelihood) the sweep can never decrease the penalized
  // objective, so it serves as the fallback that keeps every recorded
  // sweep monotone.
  const auto cd_sweep = [&](const Eigen::VectorXd& weights,
                            const Eigen::VectorXd& eta) {
    Eigen::VectorXd residual(n);  // w * (z - f), starts as y - p
    for (Eigen::Index i = 0; i < n; ++i) {
      residual(i) = y(i) - sigmoid(eta(i));
    }
    const Eigen::VectorXd wxx =
        (design.x.array().square().colwise() * weights.array())
            .colwise()
            .sum();
    const double w_sum = weights.sum();
    double max_change = 0.0;
    for (int pass = 0; pass < 10; ++pass) {
      double pass_change = 0.0;
      {  // intercept, unpenalized
        const double delta = residual.sum() / w_sum;
        if (delta != 0.0) {
          residual -= delta * weights;
          beta0 += delta;
          pass_change = std::max(pass_change, std::abs(delta));
        }
      }
      for (Eigen::Index a = 0; a < ra; ++a) {
        const double num =
            design.x.col(a).dot(residual) + wxx(a) * beta(a);
        const double next =
            soft_threshold(num, lambda1) / (wxx(a) + 2.0 * lambda2);
        const double delta = next - beta(a);
        if (delta != 0.0) {
          residual -= delta * (weights.array() * design.x.col(a).array())
                                  .matrix();
          beta(a) = next;
          pass_change = std::max(pass_change, std::abs(delta));
        }
      }
      max_change = std::max(max_change, pass_change);
      if (pass_change < 1e-11) break;
    }
    return max_change;
  };

  Eigen::VectorXd eta = (design.x * beta).array() + beta0;
  double obj = objective(eta);
  if (info != nullptr) {
    info->objective_trace.clear();
    info->objective_trace.push_back(obj);
  }

  constexpr int kMaxSweeps = 2000;
  constexpr double kCoefTol = 1e-9;
  constexpr double kObjTol = 1e-11;
  bool converged = false;
  int sweep = 0;

  Eigen::VectorXd weights(n);
  while (sweep < kMaxSweeps) {
    ++sweep;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = sigmoid(eta(i));
      weights(i) = std::max(p * (1.0 - p), 1e-10);
    }
    const double beta0_saved = beta0;
    const Eigen::VectorXd beta_saved = beta;

    double max_change = cd_sweep(weights, eta);
    Eigen::VectorXd eta_next = (design.x * beta).array() + beta0;
    double obj_next = objective(eta_next);
    if (obj_next < obj - 1e-15) {
      // The adaptive quadratic overshot; redo the sweep with the
      // guaranteed curvature bound.
      beta0 = beta0_saved;
      beta = beta_saved;
      weights.setConstant(0.25);
      max_change = cd_sweep(weights, eta);
      eta_next = (design.x * beta).array() + beta0;
      obj_next = objective(eta_next);
    }
    eta = std::move(eta_next);
    if (info != nullptr) {
      info->objective_trace.push_back(obj_next);
    }
    const double improvement = obj_next - obj;
    obj = obj_next;
    if (improvement < kObjTol && max_change < kCoefTol) {
      converged = true;
      break;
    }
  }

  LogisticModel model;
  model.penalty = penalty;
  model.lambda = lambda;
  model.alpha = penalty == Penalty::elastic_net ? alpha
                : penalty == Penalty::lasso     ? 1.0
                : penalty == Penalty::ridge     ? 0.0
                                                : alpha;
  model.converged = converged;
  model.iterations = sweep;
  if (info != nullptr) {
    info->sweeps = sweep;
  }
  model.coefficients = Eigen::VectorXd::Zero(ds.num_biomarkers());
  model.intercept = beta0;
  for (Eigen::Index a = 0; a < ra; ++a) {
    const Eigen::Index k = design.active[static_cast<std::size_t>(a)];
    model.coefficients(k) = beta(a) / design.sd(k);
    model.intercept -= model.coefficients(k) * design.mean(k);
  }
  return model;
}

double logistic_log_likelihood(const Dataset& ds, const LogisticModel& model) {
  const Eigen::VectorXd y = labels_as_vector(ds);
  Eigen::VectorXd eta =
      (ds.features() * model.coefficients).array() + model.intercept;
  return log_likelihood_eta(eta, y);
}

Eigen::VectorXd logistic_gradient(const Dataset& ds,
                                  const LogisticModel& model) {
  const Eigen::VectorXd y = labels_as_vector(ds);
  Eigen::VectorXd eta =
      (ds.features() * model.coefficients).array() + model.intercept;
  Eigen::VectorXd residual(ds.n());
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    residual(i) = y(i) - sigmoid(eta(i));
  }
  Eigen::VectorXd gradient(ds.num_biomarkers() + 1);
  gradient(0) = residual.sum();
  gradient.tail(ds.num_biomarkers()) = ds.features().transpose() * residual;
  return gradient;
}

double lambda_max(const Dataset& ds, Penalty penalty, double alpha) {
  require_complete(ds, "lambda path");
  require_both_classes(ds);
  const Eigen::VectorXd y = labels_as_vector(ds);
  const StandardizedDesign design = build_standardized(ds);
  const Eigen::VectorXd centered = y.array() - y.mean();
  const double largest =
      design.x.cols() > 0
          ? (design.x.transpose() * centered).cwiseAbs().maxCoeff()
          : 0.0;
  double l1_share = 1.0;
  switch (penalty) {
    case Penalty::lasso: l1_share = 1.0; break;
    case Penalty::elastic_net: l1_share = std::max(alpha, 1e-3); break;
    case Penalty::ridge:
    case Penalty::none: l1_share = 1e-3; break;
  }
  const double value = largest / l1_share;
  return value > 0.0 ? value : 1.0;
}

std::vector<double> lambda_path(const Dataset& ds, Penalty penalty,
                                double alpha, int count, double min_ratio) {
  if (count < 1) {
    throw std::invalid_argument("lambda path needs at least one value");
  }
  // Tiny inflation keeps the top of the path strictly inside the all-zero
  // region despite accumulation-order noise in the gradient.
  const double top = lambda_max(ds, penalty, alpha) * (1.0 + 1e-9);
  std::vector<double> path;
  path.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    path.push_back(top);
    return path;
  }
  const double log_top = std::log(top);
  const double log_bottom = std::log(top * min_ratio);
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    path.push_back(std::exp(log_top + t * (log_bottom - log_top)));
  }
  return path;
}

std::string to_json_string(const LogisticModel& model) {
  nlohmann::json doc{
      {"schema", "qbplab.logistic_model"},
      {"version", 1},
      {"intercept", model.intercept},
      {"coefficients", std::vector<double>(model.coefficients.begin(),
                                           model.coefficients.end())},
      {"penalty", penalty_name(model.penalty)},
      {"lambda", model.lambda},
      {"alpha", model.alpha},
      {"converged", model.converged},
      {"iterations", model.iterations}};
  return doc.dump(2);
}

LogisticModel logistic_from_json_string(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  if (doc.at("schema").get<std::string>() != "qbplab.logistic_model" ||
      doc.at("version").get<int>() != 1) {
    throw std::runtime_error("unsupported logistic model document");
  }
  LogisticModel model;
  model.intercept = doc.at("intercept").get<double>();
  const auto coefs = doc.at("coefficients").get<std::vector<double>>();
  model.coefficients =
      Eigen::Map<const Eigen::VectorXd>(coefs.data(),
                                        static_cast<Eigen::Index>(coefs.size()));
  const std::string pname = doc.at("penalty").get<std::string>();
  model.penalty = pname == "lasso"         ? Penalty::lasso
                  : pname == "elastic_net" ? Penalty::elastic_net
                  : pname == "ridge"       ? Penalty::ridge
                                           : Penalty::none;
  model.lambda = doc.at("lambda").get<double>();
  model.alpha = doc.at("alpha").get<double>();
  model.converged = doc.at("converged").get<bool>();
  model.iterations = doc.at("iterations").get<int>();
  return model;
}

}  // namespace qbplab
