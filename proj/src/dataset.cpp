#include "qbplab/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qbplab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double v) {
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

double parse_cell(const std::string& field, std::size_t row, std::size_t col,
                  const std::string& col_name) {
  if (field.empty()) {
    return kNaN;
  }
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc() || result.ptr != last) {
    throw std::runtime_error("non-numeric cell '" + field + "' at row " +
                             std::to_string(row) + ", column '" + col_name +
                             "' (" + std::to_string(col + 1) + ")");
  }
  return value;
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd features, std::vector<int> labels,
                 std::vector<std::string> names, std::string label_name)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      names_(std::move(names)),
      label_name_(std::move(label_name)) {
  if (features_.rows() < 2) {
    throw std::invalid_argument("dataset needs at least 2 subjects, got " +
                                std::to_string(features_.rows()));
  }
  if (features_.cols() < 1) {
    throw std::invalid_argument("dataset needs at least 1 biomarker");
  }
  if (static_cast<Eigen::Index>(labels_.size()) != features_.rows()) {
    throw std::invalid_argument("label count does not match row count");
  }
  if (static_cast<Eigen::Index>(names_.size()) != features_.cols()) {
    throw std::invalid_argument("name count does not match column count");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != 0 && labels_[i] != 1) {
      throw std::invalid_argument("label at row " + std::to_string(i + 1) +
                                  " is not 0 or 1");
    }
  }
  std::set<std::string> seen(names_.begin(), names_.end());
  if (seen.size() != names_.size()) {
    throw std::invalid_argument("duplicate biomarker names");
  }
}

bool Dataset::has_missing() const {
  return features_.hasNaN();
}

std::vector<int> Dataset::class_indices(int label) const {
  std::vector<int> idx;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) {
      idx.push_back(static_cast<int>(i));
    }
  }
  return idx;
}

int Dataset::count_label(int label) const {
  return static_cast<int>(std::count(labels_.begin(), labels_.end(), label));
}

Dataset Dataset::subset(std::span<const int> rows) const {
  Eigen::MatrixXd features(rows.size(), features_.cols());
  std::vector<int> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    features.row(static_cast<Eigen::Index>(i)) = features_.row(rows[i]);
    labels[i] = labels_[static_cast<std::size_t>(rows[i])];
  }
  return Dataset(std::move(features), std::move(labels), names_, label_name_);
}

bool Dataset::operator==(const Dataset& other) const {
  if (labels_ != other.labels_ || names_ != other.names_ ||
      label_name_ != other.label_name_) {
    return false;
  }
  if (features_.rows() != other.features_.rows() ||
      features_.cols() != other.features_.cols()) {
    return false;
  }
  for (Eigen::Index i = 0; i < features_.rows(); ++i) {
    for (Eigen::Index k = 0; k < features_.cols(); ++k) {
      const double a = features_(i, k);
      const double b = other.features_(i, k);
      if (std::isnan(a) != std::isnan(b)) return false;
      if (!std::isnan(a) && a != b) return false;
    }
  }
  return true;
}

std::vector<std::vector<int>> FoldAssignment::members() const {
  std::vector<std::vector<int>> result(num_folds);
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    result[static_cast<std::size_t>(fold_of[i])].push_back(
        static_cast<int>(i));
  }
  return result;
}

std::vector<int> FoldAssignment::complement(int fold) const {
  std::vector<int> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) {
      rows.push_back(static_cast<int>(i));
    }
  }
  return rows;
}

double Standardizer::apply(double x, Eigen::Index k) const {
  if (std::isnan(x)) return x;
  return sd(k) > 0.0 ? (x - mean(k)) / sd(k) : 0.0;
}

Eigen::VectorXd Standardizer::apply_row(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    out(k) = apply(x(k), k);
  }
  return out;
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("'" + path + "' is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_line(line);

  std::set<std::string> seen;
  for (const auto& name : header) {
    if (!seen.insert(name).second) {
      throw std::runtime_error("duplicate column name '" + name + "' in '" +
                               path + "'");
    }
  }
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw std::runtime_error("label column '" + label_column +
                             "' not found in '" + path + "'");
  }
  const std::size_t label_pos =
      static_cast<std::size_t>(label_it - header.begin());

  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_pos) names.push_back(header[c]);
  }
  if (names.empty()) {
    throw std::runtime_error("'" + path + "' has no biomarker columns");
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t row_number = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;  // trailing newline
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error(
          "row " + std::to_string(row_number) + " has " +
          std::to_string(fields.size()) + " fields, expected " +
          std::to_string(header.size()));
    }
    const double label_value =
        parse_cell(fields[label_pos], row_number, label_pos, label_column);
    if (std::isnan(label_value) ||
        (label_value != 0.0 && label_value != 1.0)) {
      throw std::runtime_error("label at row " + std::to_string(row_number) +
                               " is not 0 or 1");
    }
    labels.push_back(static_cast<int>(label_value));
    std::vector<double> row;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == label_pos) continue;
      row.push_back(parse_cell(fields[c], row_number, c, header[c]));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw std::runtime_error("'" + path + "' has no data rows");
  }

  Eigen::MatrixXd features(rows.size(), names.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          rows[i][k];
    }
  }
  return Dataset(std::move(features), std::move(labels), std::move(names),
                 label_column);
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  out << ds.label_name();
  for (const auto& name : ds.names()) {
    out << ',' << name;
  }
  out << '\n';
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    out << ds.labels()[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < ds.num_biomarkers(); ++k) {
      out << ',';
      if (!ds.is_missing(i, k)) {
        out << format_double(ds.value(i, k));
      }
    }
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

FoldAssignment stratified_folds(const Dataset& ds, int num_folds,
                                RngStream& rng) {
  if (num_folds < 2) {
    throw std::invalid_argument("fold count must be at least 2");
  }
  if (num_folds > ds.n()) {
    throw std::invalid_argument("fold count " + std::to_string(num_folds) +
                                " exceeds subject count " +
                                std::to_string(ds.n()));
  }
  FoldAssignment assignment;
  assignment.num_folds = num_folds;
  assignment.fold_of.assign(static_cast<std::size_t>(ds.n()), -1);
  for (int label : {0, 1}) {
    std::vector<int> idx = ds.class_indices(label);
    if (static_cast<int>(idx.size()) < num_folds) {
      throw std::invalid_argument(
          "class " + std::to_string(label) + " has " +
          std::to_string(idx.size()) + " members, too few for " +
          std::to_string(num_folds) + " stratified folds");
    }
    rng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      assignment.fold_of[static_cast<std::size_t>(idx[i])] =
          static_cast<int>(i % static_cast<std::size_t>(num_folds));
    }
  }
  return assignment;
}

std::pair<Dataset, Standardizer> standardize(const Dataset& ds) {
  const Eigen::Index r = ds.num_biomarkers();
  Standardizer st;
  st.mean.resize(r);
  st.sd.resize(r);
  for (Eigen::Index k = 0; k < r; ++k) {
    double sum = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      if (!ds.is_missing(i, k)) {
        sum += ds.value(i, k);
        ++count;
      }
    }
    if (count < 2) {
      throw std::invalid_argument("column '" + ds.names()[k] +
                                  "' has fewer than 2 non-missing values");
    }
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      if (!ds.is_missing(i, k)) {
        const double d = ds.value(i, k) - mean;
        ss += d * d;
      }
    }
    st.mean(k) = mean;
    st.sd(k) = std::sqrt(ss / static_cast<double>(count - 1));
  }
  Eigen::MatrixXd transformed(ds.n(), r);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    for (Eigen::Index k = 0; k < r; ++k) {
      transformed(i, k) = st.apply(ds.value(i, k), k);
    }
  }
  return {Dataset(std::move(transformed), ds.labels(), ds.names(),
                  ds.label_name()),
          st};
}

void require_both_classes(const Dataset& ds) {
  if (ds.count_label(0) == 0 || ds.count_label(1) == 0) {
    throw std::invalid_argument(
        "fitting requires at least one case and one control");
  }
}

void require_complete(const Dataset& ds, const std::string& context) {
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    for (Eigen::Index k = 0; k < ds.num_biomarkers(); ++k) {
      if (ds.is_missing(i, k)) {
        throw std::invalid_argument(
            context + " does not accept missing values (row " +
            std::to_string(i + 1) + ", biomarker '" +
            ds.names()[static_cast<std::size_t>(k)] + "')");
      }
    }
  }
}

}  // namespace qbplab
