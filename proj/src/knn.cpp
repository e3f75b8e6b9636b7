#include "qbplab/knn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace qbplab {

double KnnModel::score(const Eigen::VectorXd& x) const {
  if (x.size() != train_features.cols()) {
    throw std::invalid_argument("query length does not match biomarker count");
  }
  if (x.hasNaN()) {
    throw std::invalid_argument("kNN queries must be complete");
  }
  const Eigen::VectorXd q = standardizer.apply_row(x);
  const Eigen::Index n = train_features.rows();
  std::vector<double> distances(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    distances[static_cast<std::size_t>(i)] =
        (train_features.row(i).transpose() - q).squaredNorm();
  }
  std::vector<double> sorted = distances;
  std::nth_element(sorted.begin(), sorted.begin() + (neighbors - 1),
                   sorted.end());
  const double kth = sorted[static_cast<std::size_t>(neighbors - 1)];

  int votes = 0;
  int cases = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (distances[static_cast<std::size_t>(i)] <= kth) {
      ++votes;
      cases += labels[static_cast<std::size_t>(i)];
    }
  }
  return static_cast<double>(cases) / static_cast<double>(votes);
}

KnnModel fit_knn(const Dataset& ds, int neighbors) {
  require_complete(ds, "k-nearest neighbors");
  if (neighbors < 1 || neighbors > ds.n()) {
    throw std::invalid_argument("neighbor count outside [1, n]");
  }
  auto [standardized, st] = standardize(ds);
  KnnModel model;
  model.train_features = standardized.features();
  model.labels = ds.labels();
  model.neighbors = neighbors;
  model.standardizer = std::move(st);
  return model;
}

std::string to_json_string(const KnnModel& model) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.train_features.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < model.train_features.cols(); ++j) {
      row.push_back(model.train_features(i, j));
    }
    rows.push_back(std::move(row));
  }
  nlohmann::json doc{
      {"schema", "qbplab.knn_model"},
      {"version", 1},
      {"train_features", rows},
      {"labels", model.labels},
      {"neighbors", model.neighbors},
      {"mean", std::vector<double>(model.standardizer.mean.begin(),
                                   model.standardizer.mean.end())},
      {"sd", std::vector<double>(model.standardizer.sd.begin(),
                                 model.standardizer.sd.end())}};
  return doc.dump(2);
}

KnnModel knn_from_json_string(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  if (doc.at("schema").get<std::string>() != "qbplab.knn_model" ||
      doc.at("version").get<int>() != 1) {
    throw std::runtime_error("unsupported knn document");
  }
  KnnModel model;
  const auto rows =
      doc.at("train_features").get<std::vector<std::vector<double>>>();
  model.train_features.resize(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      model.train_features(static_cast<Eigen::Index>(i),
                           static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  model.labels = doc.at("labels").get<std::vector<int>>();
  model.neighbors = doc.at("neighbors").get<int>();
  const auto mean = doc.at("mean").get<std::vector<double>>();
  const auto sd = doc.at("sd").get<std::vector<double>>();
  model.standardizer.mean = Eigen::Map<const Eigen::VectorXd>(
      mean.data(), static_cast<Eigen::Index>(mean.size()));
  model.standardizer.sd = Eigen::Map<const Eigen::VectorXd>(
      sd.data(), static_cast<Eigen::Index>(sd.size()));
  return model;
}

}  // namespace qbplab
