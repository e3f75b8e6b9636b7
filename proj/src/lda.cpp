#include "qbplab/lda.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace qbplab {

LdaModel fit_lda(const Dataset& ds, std::optional<double> epsilon) {
  require_complete(ds, "linear discriminant analysis");
  require_both_classes(ds);
  const Eigen::Index r = ds.num_biomarkers();
  const auto controls = ds.class_indices(0);
  const auto cases = ds.class_indices(1);
  if (controls.size() < 2 || cases.size() < 2) {
    throw std::invalid_argument("LDA needs at least 2 subjects per class");
  }

  LdaModel model;
  model.mean_controls = Eigen::VectorXd::Zero(r);
  model.mean_cases = Eigen::VectorXd::Zero(r);
  for (int i : controls) model.mean_controls += ds.row(i);
  for (int i : cases) model.mean_cases += ds.row(i);
  model.mean_controls /= static_cast<double>(controls.size());
  model.mean_cases /= static_cast<double>(cases.size());

  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(r, r);
  for (int i : controls) {
    const Eigen::VectorXd d = ds.row(i) - model.mean_controls;
    scatter += d * d.transpose();
  }
  for (int i : cases) {
    const Eigen::VectorXd d = ds.row(i) - model.mean_cases;
    scatter += d * d.transpose();
  }
  model.pooled_covariance =
      scatter / static_cast<double>(controls.size() + cases.size() - 2);

  model.epsilon = epsilon.has_value()
                      ? *epsilon
                      : 1e-6 * model.pooled_covariance.trace() /
                            static_cast<double>(r);
  if (model.epsilon < 0.0) {
    throw std::invalid_argument("LDA stabilizer must be nonnegative");
  }

  Eigen::MatrixXd stabilized = model.pooled_covariance;
  stabilized.diagonal().array() += model.epsilon;
  const Eigen::LLT<Eigen::MatrixXd> llt(stabilized);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "pooled covariance is singular; use a positive stabilizer");
  }

  const double prior_cases =
      static_cast<double>(cases.size()) /
      static_cast<double>(controls.size() + cases.size());
  model.log_prior_ratio = std::log(prior_cases / (1.0 - prior_cases));

  const Eigen::VectorXd mean_diff = model.mean_cases - model.mean_controls;
  model.direction = llt.solve(mean_diff);
  model.offset = model.log_prior_ratio -
                 0.5 * (model.mean_cases + model.mean_controls)
                           .dot(model.direction);
  return model;
}

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.begin(), v.end());
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

std::string to_json_string(const LdaModel& model) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.pooled_covariance.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < model.pooled_covariance.cols(); ++j) {
      row.push_back(model.pooled_covariance(i, j));
    }
    rows.push_back(std::move(row));
  }
  nlohmann::json doc{{"schema", "qbplab.lda_model"},
                     {"version", 1},
                     {"mean_controls", vector_to_json(model.mean_controls)},
                     {"mean_cases", vector_to_json(model.mean_cases)},
                     {"pooled_covariance", rows},
                     {"epsilon", model.epsilon},
                     {"log_prior_ratio", model.log_prior_ratio},
                     {"direction", vector_to_json(model.direction)},
                     {"offset", model.offset}};
  return doc.dump(2);
}

LdaModel lda_from_json_string(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  if (doc.at("schema").get<std::string>() != "qbplab.lda_model" ||
      doc.at("version").get<int>() != 1) {
    throw std::runtime_error("unsupported lda document");
  }
  LdaModel model;
  model.mean_controls = vector_from_json(doc.at("mean_controls"));
  model.mean_cases = vector_from_json(doc.at("mean_cases"));
  const auto rows =
      doc.at("pooled_covariance").get<std::vector<std::vector<double>>>();
  model.pooled_covariance.resize(rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      model.pooled_covariance(static_cast<Eigen::Index>(i),
                              static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  model.epsilon = doc.at("epsilon").get<double>();
  model.log_prior_ratio = doc.at("log_prior_ratio").get<double>();
  model.direction = vector_from_json(doc.at("direction"));
  model.offset = doc.at("offset").get<double>();
  return model;
}

}  // namespace qbplab
