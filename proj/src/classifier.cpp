#include "qbplab/classifier.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "qbplab/knn.hpp"
#include "qbplab/lda.hpp"
#include "qbplab/logistic.hpp"
#include "qbplab/pca.hpp"
#include "qbplab/pls.hpp"

namespace qbplab {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

std::string triple_label(const std::vector<double>& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ';';
    out += fmt(v[i]);
  }
  return out + ")";
}

// --- fitted-model adapters ---

class QbpScorer final : public FittedClassifier {
 public:
  explicit QbpScorer(FittedQbp model) : model_(std::move(model)) {}
  double score(const Eigen::VectorXd& x) const override {
    return model_.total_disease_score(x);
  }
  std::vector<std::uint8_t> selected_biomarkers(Eigen::Index) const override {
    return model_.selected_biomarkers();
  }

 private:
  FittedQbp model_;
};

class LogisticScorer final : public FittedClassifier {
 public:
  LogisticScorer(LogisticModel model, bool sparse)
      : model_(std::move(model)), sparse_(sparse) {}
  double score(const Eigen::VectorXd& x) const override {
    return model_.score(x);
  }
  std::vector<std::uint8_t> selected_biomarkers(Eigen::Index r) const override {
    if (sparse_) return model_.selected();
    return std::vector<std::uint8_t>(static_cast<std::size_t>(r), 1);
  }

 private:
  LogisticModel model_;
  bool sparse_;  // l1-type penalties actually drop biomarkers
};

class PclrScorer final : public FittedClassifier {
 public:
  explicit PclrScorer(PclrModel model) : model_(std::move(model)) {}
  double score(const Eigen::VectorXd& x) const override {
    return model_.score(x);
  }

 private:
  PclrModel model_;
};

class LdaScorer final : public FittedClassifier {
 public:
  explicit LdaScorer(LdaModel model) : model_(std::move(model)) {}
  double score(const Eigen::VectorXd& x) const override {
    return model_.score(x);
  }

 private:
  LdaModel model_;
};

class PlsLdaScorer final : public FittedClassifier {
 public:
  explicit PlsLdaScorer(PlsLdaModel model) : model_(std::move(model)) {}
  double score(const Eigen::VectorXd& x) const override {
    return model_.score(x);
  }

 private:
  PlsLdaModel model_;
};

class KnnScorer final : public FittedClassifier {
 public:
  explicit KnnScorer(KnnModel model) : model_(std::move(model)) {}
  double score(const Eigen::VectorXd& x) const override {
    return model_.score(x);
  }

 private:
  KnnModel model_;
};

// --- methods ---

class QbpClassifier final : public Classifier {
 public:
  explicit QbpClassifier(MethodOptions options)
      : options_(std::move(options)) {}

  const std::string& name() const override {
    static const std::string n = "qbp";
    return n;
  }

  std::vector<ParamSetting> tuning_grid(const Dataset&, int) const override {
    std::vector<ParamSetting> grid;
    for (const auto& bounds : options_.qbp_ratio_bounds) {
      for (const auto& scores : options_.qbp_max_scores) {
        ParamSetting s;
        s.ratio_bounds = bounds;
        s.max_scores = scores;
        s.label = "R*=" + triple_label(bounds) + " v=" + triple_label(scores);
        grid.push_back(std::move(s));
      }
    }
    return grid;
  }

  std::unique_ptr<FittedClassifier> fit(
      const Dataset& train, const ParamSetting& setting) const override {
    return std::make_unique<QbpScorer>(fit_qbp(train, config_for(setting)));
  }

  std::vector<std::unique_ptr<FittedClassifier>> fit_grid(
      const Dataset& train,
      const std::vector<ParamSetting>& grid) const override {
    // Predominance, cutpoints and exceedratios do not depend on the tuned
    // bounds/scores, so compute them once per training set.
    std::vector<std::unique_ptr<FittedClassifier>> models;
    if (grid.empty()) return models;
    const TailProfile profile =
        compute_tail_profile(train, config_for(grid.front()));
    models.reserve(grid.size());
    for (const auto& setting : grid) {
      models.push_back(std::make_unique<QbpScorer>(
          apply_scoring(profile, config_for(setting))));
    }
    return models;
  }

 private:
  QbpConfig config_for(const ParamSetting& setting) const {
    QbpConfig config;
    config.quantile_rule = options_.qbp_quantile_rule;
    if (!setting.ratio_bounds.empty()) {
      config.ratio_bounds = setting.ratio_bounds;
    }
    if (!setting.max_scores.empty()) {
      config.max_scores = setting.max_scores;
    }
    return config;
  }

  MethodOptions options_;
};

class LogisticClassifier final : public Classifier {
 public:
  const std::string& name() const override {
    static const std::string n = "lr";
    return n;
  }
  std::vector<ParamSetting> tuning_grid(const Dataset&, int) const override {
    return {ParamSetting{}};
  }
  std::unique_ptr<FittedClassifier> fit(const Dataset& train,
                                        const ParamSetting&) const override {
    return std::make_unique<LogisticScorer>(fit_logistic(train), false);
  }
};

class PenalizedClassifier final : public Classifier {
 public:
  PenalizedClassifier(Penalty penalty, std::string name,
                      MethodOptions options)
      : penalty_(penalty),
        name_(std::move(name)),
        options_(std::move(options)) {}

  const std::string& name() const override { return name_; }

  std::vector<ParamSetting> tuning_grid(const Dataset& train,
                                        int) const override {
    const auto path = lambda_path(train, penalty_, alpha(),
                                  options_.lambda_count,
                                  options_.lambda_min_ratio);
    std::vector<ParamSetting> grid;
    grid.reserve(path.size());
    for (double lambda : path) {
      ParamSetting s;
      s.lambda = lambda;
      s.alpha = alpha();
      s.label = "lambda=" + fmt(lambda);
      grid.push_back(std::move(s));
    }
    return grid;
  }

  std::unique_ptr<FittedClassifier> fit(
      const Dataset& train, const ParamSetting& setting) const override {
    return std::make_unique<LogisticScorer>(
        fit_penalized_logistic(train, penalty_, setting.lambda, alpha()),
        sparse());
  }

  std::vector<std::unique_ptr<FittedClassifier>> fit_grid(
      const Dataset& train,
      const std::vector<ParamSetting>& grid) const override {
    // Warm starts down the (descending) lambda path.
    std::vector<std::unique_ptr<FittedClassifier>> models;
    models.reserve(grid.size());
    LogisticModel previous;
    bool have_previous = false;
    for (const auto& setting : grid) {
      LogisticModel model = fit_penalized_logistic(
          train, penalty_, setting.lambda, alpha(), nullptr,
          have_previous ? &previous : nullptr);
      previous = model;
      have_previous = true;
      models.push_back(
          std::make_unique<LogisticScorer>(std::move(model), sparse()));
    }
    return models;
  }

 private:
  double alpha() const {
    switch (penalty_) {
      case Penalty::lasso: return 1.0;
      case Penalty::ridge: return 0.0;
      case Penalty::elastic_net: return options_.en_alpha;
      case Penalty::none: return 1.0;
    }
    return 1.0;
  }
  bool sparse() const {
    return penalty_ == Penalty::lasso || penalty_ == Penalty::elastic_net;
  }

  Penalty penalty_;
  std::string name_;
  MethodOptions options_;
};

class PclrClassifier final : public Classifier {
 public:
  const std::string& name() const override {
    static const std::string n = "pclr";
    return n;
  }

  std::vector<ParamSetting> tuning_grid(const Dataset& train,
                                        int min_fit_n) const override {
    const int max_components = std::max(
        1, std::min<int>(static_cast<int>(train.num_biomarkers()),
                         min_fit_n - 2));
    std::vector<ParamSetting> grid;
    for (int s = 1; s <= max_components; ++s) {
      ParamSetting p;
      p.components = s;
      p.label = "s=" + std::to_string(s);
      grid.push_back(std::move(p));
    }
    return grid;
  }

  std::unique_ptr<FittedClassifier> fit(
      const Dataset& train, const ParamSetting& setting) const override {
    return std::make_unique<PclrScorer>(fit_pclr(train, setting.components));
  }

  std::vector<std::unique_ptr<FittedClassifier>> fit_grid(
      const Dataset& train,
      const std::vector<ParamSetting>& grid) const override {
    // One eigendecomposition serves every component count.
    const PcaBasis basis = pca(train);
    std::vector<std::unique_ptr<FittedClassifier>> models;
    models.reserve(grid.size());
    for (const auto& setting : grid) {
      PclrModel model;
      model.basis = basis;
      model.components = setting.components;
      const Eigen::MatrixXd z =
          basis.scores(train.features(), setting.components);
      std::vector<std::string> names;
      for (Eigen::Index c = 0; c < z.cols(); ++c) {
        names.push_back("pc" + std::to_string(c + 1));
      }
      const Dataset latent(z, train.labels(), std::move(names),
                           train.label_name());
      model.logit = fit_logistic(latent);
      models.push_back(std::make_unique<PclrScorer>(std::move(model)));
    }
    return models;
  }
};

class LdaClassifier final : public Classifier {
 public:
  const std::string& name() const override {
    static const std::string n = "lda";
    return n;
  }
  std::vector<ParamSetting> tuning_grid(const Dataset&, int) const override {
    return {ParamSetting{}};
  }
  std::unique_ptr<FittedClassifier> fit(const Dataset& train,
                                        const ParamSetting&) const override {
    return std::make_unique<LdaScorer>(fit_lda(train));
  }
};

class PlsLdaClassifier final : public Classifier {
 public:
  const std::string& name() const override {
    static const std::string n = "pls-lda";
    return n;
  }

  std::vector<ParamSetting> tuning_grid(const Dataset& train,
                                        int min_fit_n) const override {
    const int max_components = std::max(
        1, std::min<int>(static_cast<int>(train.num_biomarkers()),
                         min_fit_n - 2));
    std::vector<ParamSetting> grid;
    for (int s = 1; s <= max_components; ++s) {
      ParamSetting p;
      p.components = s;
      p.label = "s=" + std::to_string(s);
      grid.push_back(std::move(p));
    }
    return grid;
  }

  std::unique_ptr<FittedClassifier> fit(
      const Dataset& train, const ParamSetting& setting) const override {
    return std::make_unique<PlsLdaScorer>(
        fit_pls_lda(train, setting.components));
  }

  std::vector<std::unique_ptr<FittedClassifier>> fit_grid(
      const Dataset& train,
      const std::vector<ParamSetting>& grid) const override {
    // SIMPLS components are nested: the basis extracted at the largest
    // count provides every smaller count as a prefix.
    int max_components = 1;
    for (const auto& setting : grid) {
      max_components = std::max(max_components, setting.components);
    }
    max_components = std::min<int>(
        max_components, static_cast<int>(
                            std::min(train.num_biomarkers(), train.n() - 1)));
    const PlsBasis full = simpls(train, max_components);

    std::vector<std::unique_ptr<FittedClassifier>> models;
    models.reserve(grid.size());
    for (const auto& setting : grid) {
      const Eigen::Index s = std::min<Eigen::Index>(
          setting.components, full.components());
      PlsLdaModel model;
      model.basis.center = full.center;
      model.basis.scale = full.scale;
      model.basis.directions = full.directions.leftCols(s);
      model.basis.rank_deficient = s < setting.components;
      const Eigen::MatrixXd z = model.basis.scores(train.features());
      std::vector<std::string> names;
      for (Eigen::Index c = 0; c < z.cols(); ++c) {
        names.push_back("lv" + std::to_string(c + 1));
      }
      const Dataset latent(z, train.labels(), std::move(names),
                           train.label_name());
      model.lda = fit_lda(latent);
      models.push_back(std::make_unique<PlsLdaScorer>(std::move(model)));
    }
    return models;
  }
};

class KnnClassifier final : public Classifier {
 public:
  explicit KnnClassifier(MethodOptions options)
      : options_(std::move(options)) {}

  const std::string& name() const override {
    static const std::string n = "knn";
    return n;
  }

  std::vector<ParamSetting> tuning_grid(const Dataset&,
                                        int min_fit_n) const override {
    std::vector<ParamSetting> grid;
    for (int k : options_.knn_candidates) {
      if (k > min_fit_n) continue;
      ParamSetting p;
      p.neighbors = k;
      p.label = "k=" + std::to_string(k);
      grid.push_back(std::move(p));
    }
    if (grid.empty()) {
      ParamSetting p;
      p.neighbors = 1;
      p.label = "k=1";
      grid.push_back(std::move(p));
    }
    return grid;
  }

  std::unique_ptr<FittedClassifier> fit(
      const Dataset& train, const ParamSetting& setting) const override {
    const int k =
        std::min<int>(setting.neighbors, static_cast<int>(train.n()));
    return std::make_unique<KnnScorer>(fit_knn(train, std::max(1, k)));
  }

 private:
  MethodOptions options_;
};

}  // namespace

std::vector<std::uint8_t> FittedClassifier::selected_biomarkers(
    Eigen::Index r) const {
  return std::vector<std::uint8_t>(static_cast<std::size_t>(r), 1);
}

std::vector<std::unique_ptr<FittedClassifier>> Classifier::fit_grid(
    const Dataset& train, const std::vector<ParamSetting>& grid) const {
  std::vector<std::unique_ptr<FittedClassifier>> models;
  models.reserve(grid.size());
  for (const auto& setting : grid) {
    models.push_back(fit(train, setting));
  }
  return models;
}

const std::vector<std::string>& known_method_names() {
  static const std::vector<std::string> names{
      "qbp",  "lr",  "plr-lasso", "plr-en", "plr-ridge",
      "pclr", "lda", "pls-lda",   "knn"};
  return names;
}

std::unique_ptr<Classifier> make_classifier(const std::string& name,
                                            const MethodOptions& options) {
  if (name == "qbp") return std::make_unique<QbpClassifier>(options);
  if (name == "lr") return std::make_unique<LogisticClassifier>();
  if (name == "plr-lasso") {
    return std::make_unique<PenalizedClassifier>(Penalty::lasso, "plr-lasso",
                                                 options);
  }
  if (name == "plr-en") {
    return std::make_unique<PenalizedClassifier>(Penalty::elastic_net,
                                                 "plr-en", options);
  }
  if (name == "plr-ridge") {
    return std::make_unique<PenalizedClassifier>(Penalty::ridge, "plr-ridge",
                                                 options);
  }
  if (name == "pclr") return std::make_unique<PclrClassifier>();
  if (name == "lda") return std::make_unique<LdaClassifier>();
  if (name == "pls-lda") return std::make_unique<PlsLdaClassifier>();
  if (name == "knn") return std::make_unique<KnnClassifier>(options);

  std::string valid;
  for (const auto& n : known_method_names()) {
    if (!valid.empty()) valid += ", ";
    valid += n;
  }
  throw std::invalid_argument("unknown method '" + name +
                              "'; valid methods: " + valid);
}

Eigen::VectorXd score_rows(const FittedClassifier& model, const Dataset& ds,
                           std::span<const int> rows) {
  Eigen::VectorXd scores(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    scores(static_cast<Eigen::Index>(i)) = model.score(ds.row(rows[i]));
  }
  return scores;
}

Eigen::VectorXd score_all(const FittedClassifier& model, const Dataset& ds) {
  Eigen::VectorXd scores(ds.n());
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    scores(i) = model.score(ds.row(i));
  }
  return scores;
}

}  // namespace qbplab
