#include "qbplab/simgen.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

namespace qbplab {

namespace {

constexpr int kNumMarkers = 35;

// Location/scale per biomarker for the identity, exp and identity-star
// parameterizations.
struct MarkerParams {
  double alpha_identity, eta_identity;
  double alpha_exp, eta_exp;
  double alpha_star, eta_star;
};

constexpr std::array<MarkerParams, kNumMarkers> kMarkerParams{{
    {617.8, 509.7, 6.19, 0.65, 604.4, 439.2},
    {276.9, 296.3, 5.33, 0.87, 301.1, 322.4},
    {2.61, 14.94, -1.86, 1.53, 0.50, 1.55},
    {6.94, 4.81, 1.62, 0.95, 7.90, 9.52},
    {72.08, 16.72, 4.25, 0.23, 72.13, 17.02},
    {16.69, 17.28, 2.27, 1.21, 20.23, 36.99},
    {3.25, 1.28, 1.11, 0.38, 3.27, 1.30},
    {5.94, 2.73, 1.69, 0.42, 5.94, 2.63},
    {11.66, 13.59, 1.84, 1.22, 13.29, 24.78},
    {1.41, 0.38, 0.31, 0.26, 1.42, 0.38},
    {62.29, 20.64, 4.07, 0.37, 62.73, 23.78},
    {592.1, 1395.0, 5.90, 0.86, 526.6, 549.8},
    {103.1, 129.9, 3.88, 1.36, 121.7, 279.9},
    {177.4, 61.28, 5.13, 0.31, 177.0, 55.50},
    {53.88, 29.79, 3.87, 0.47, 53.74, 26.80},
    {8.55, 0.76, 2.14, 0.09, 8.56, 0.78},
    {12.97, 11.29, 2.30, 0.69, 12.62, 9.84},
    {0.71, 0.48, -0.47, 0.51, 0.71, 0.39},
    {0.37, 1.78, 1.47, 0.78, 5.93, 5.45},
    {0.78, 1.11, -1.54, 2.01, 1.63, 12.27},
    {33.24, 19.59, 3.37, 0.51, 33.17, 18.05},
    {0.31, 0.20, -1.30, 0.58, 0.32, 0.21},
    {0.34, 0.23, -1.29, 0.71, 0.35, 0.29},
    {0.22, 0.29, -1.87, 0.80, 0.21, 0.20},
    {0.07, 0.10, -2.82, 0.64, 0.07, 0.05},
    {3.64, 2.12, 1.04, 1.01, 4.72, 6.29},
    {66.95, 82.64, 3.37, 1.82, 153.1, 794.2},
    {4.98, 2.34, 1.39, 0.92, 6.10, 7.02},
    {21.40, 29.97, 2.64, 0.81, 19.47, 18.87},
    {13.09, 24.77, 1.71, 1.36, 14.03, 32.74},
    {14.69, 12.06, 2.39, 0.82, 15.23, 14.84},
    {7.28, 5.65, 1.77, 0.65, 7.25, 5.26},
    {15.37, 37.54, 1.67, 1.38, 13.69, 32.66},
    {0.13, 0.20, -2.64, 1.21, 0.15, 0.27},
    {22.53, 37.47, 2.62, 0.94, 21.27, 25.29},
}};

// 1-based biomarker indices carrying an effect, per design family.
constexpr std::array<int, 5> kMeanShiftFive{6, 13, 20, 27, 34};
constexpr std::array<int, 10> kMeanShiftTen{3, 6, 9, 13, 17, 20, 23, 27, 30, 34};
constexpr std::array<std::pair<int, double>, 9> kScaleShifts{{
    {4, -0.15}, {5, -0.25}, {7, 0.15}, {13, 0.15}, {15, -0.15},
    {16, 0.10}, {21, 0.20}, {22, -0.20}, {28, 0.10},
}};
constexpr std::array<int, 9> kSkewedControls{4, 6, 8, 13, 14, 23, 26, 30, 35};
constexpr std::array<std::pair<int, double>, 7> kLogScaleMeanShifts{{
    {4, -0.29}, {7, -0.44}, {9, -0.41}, {10, -0.14},
    {26, 0.32}, {29, 0.26}, {31, 0.31},
}};
constexpr std::array<int, 7> kMixedIdentity{3, 5, 11, 16, 19, 21, 22};

template <typename Container>
bool contains(const Container& c, int value) {
  return std::find(c.begin(), c.end(), value) != c.end();
}

template <typename Container>
double lookup(const Container& c, int value) {
  for (const auto& [k, v] : c) {
    if (k == value) return v;
  }
  return 0.0;
}

std::string marker_name(int index_1based) {
  return index_1based < 10 ? "bm0" + std::to_string(index_1based)
                           : "bm" + std::to_string(index_1based);
}

}  // namespace

bool MarkerSim::relevant() const {
  return beta != 0.0 || nu != 0.0 || psi[0] != psi[1] ||
         alpha[0] != alpha[1] || eta[0] != eta[1];
}

SimDesign SimDesign::with_n(int subjects) const {
  SimDesign copy = *this;
  copy.n = subjects;
  return copy;
}

int RelevanceMask::count() const {
  int total = 0;
  for (auto flag : relevant) total += flag != 0;
  return total;
}

const std::vector<std::string>& valid_design_ids() {
  static const std::vector<std::string> ids{"1",  "2",  "3",  "4",  "5",
                                            "6a", "6b", "6c", "7a", "7b",
                                            "7c", "8a", "8b", "8c"};
  return ids;
}

SimDesign build_design(const std::string& id) {
  return build_design(
      id, Eigen::MatrixXd::Identity(kNumMarkers, kNumMarkers));
}

SimDesign build_design(const std::string& id,
                       const Eigen::MatrixXd& correlation) {
  const auto& ids = valid_design_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
    std::string valid;
    for (const auto& v : valid_design_ids()) {
      if (!valid.empty()) valid += ", ";
      valid += v;
    }
    throw std::invalid_argument("unknown design '" + id +
                                "'; valid ids: " + valid);
  }
  if (correlation.rows() != kNumMarkers ||
      correlation.cols() != kNumMarkers) {
    throw std::invalid_argument("correlation matrix must be 35 x 35");
  }

  const char family = id[0];
  const char variant = id.size() > 1 ? id[1] : 'a';

  SimDesign design;
  design.id = id;
  design.correlation = correlation;
  if (family <= '5') {
    design.n = 100;
    design.case_proportion = 0.5;
  } else {
    design.n = variant == 'b' ? 400 : variant == 'c' ? 250 : 100;
    design.case_proportion = variant == 'c' ? 1.0 / 5.0 : 0.5;
  }

  design.markers.reserve(kNumMarkers);
  for (int k = 1; k <= kNumMarkers; ++k) {
    const MarkerParams& p = kMarkerParams[static_cast<std::size_t>(k - 1)];
    MarkerSim m;
    m.name = marker_name(k);
    switch (family) {
      case '1':
      case '2':
      case '3':
      case '4':
        m.alpha[0] = m.alpha[1] = p.alpha_identity;
        m.eta[0] = m.eta[1] = p.eta_identity;
        m.psi[0] = m.psi[1] = Transform::identity;
        if (family == '2' && contains(kMeanShiftFive, k)) {
          m.beta = p.eta_identity;  // one training-scale sd
        }
        if (family == '3' && contains(kMeanShiftTen, k)) {
          m.beta = p.eta_identity;
        }
        if (family == '4') {
          m.nu = lookup(kScaleShifts, k);
        }
        break;
      case '5':
        if (contains(kSkewedControls, k)) {
          // Controls stay on the identity-star scale, cases are
          // log-normal with matched mean and variance.
          m.alpha[0] = p.alpha_star;
          m.eta[0] = p.eta_star;
          m.psi[0] = Transform::identity;
          m.alpha[1] = p.alpha_exp;
          m.eta[1] = p.eta_exp;
          m.psi[1] = Transform::expo;
        } else {
          m.alpha[0] = m.alpha[1] = p.alpha_exp;
          m.eta[0] = m.eta[1] = p.eta_exp;
          m.psi[0] = m.psi[1] = Transform::expo;
        }
        break;
      case '6':
      case '7':
        m.alpha[0] = m.alpha[1] = p.alpha_exp;
        m.eta[0] = m.eta[1] = p.eta_exp;
        m.psi[0] = m.psi[1] = Transform::expo;
        if (family == '6') {
          m.beta = lookup(kLogScaleMeanShifts, k);
        } else {
          m.nu = lookup(kScaleShifts, k);
        }
        break;
      case '8':
        if (contains(kMixedIdentity, k)) {
          m.alpha[0] = m.alpha[1] = p.alpha_identity;
          m.eta[0] = m.eta[1] = p.eta_identity;
          m.psi[0] = m.psi[1] = Transform::identity;
        } else {
          m.alpha[0] = m.alpha[1] = p.alpha_exp;
          m.eta[0] = m.eta[1] = p.eta_exp;
          m.psi[0] = m.psi[1] = Transform::expo;
        }
        m.beta = lookup(kLogScaleMeanShifts, k);
        m.nu = lookup(kScaleShifts, k);
        break;
      default:
        break;
    }
    design.markers.push_back(std::move(m));
  }
  return design;
}

Eigen::MatrixXd load_correlation_csv(const std::string& path,
                                     Eigen::Index expected_size) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open correlation file '" + path + "'");
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      double value = 0.0;
      const char* first = line.data() + start;
      const char* last = line.data() + end;
      auto result = std::from_chars(first, last, value);
      if (result.ec != std::errc() || result.ptr != last) {
        throw std::runtime_error("malformed correlation entry in '" + path +
                                 "' row " + std::to_string(rows.size() + 1));
      }
      row.push_back(value);
      start = end + 1;
      if (end == line.size()) break;
    }
    rows.push_back(std::move(row));
  }
  if (static_cast<Eigen::Index>(rows.size()) != expected_size) {
    throw std::runtime_error("correlation file must have " +
                             std::to_string(expected_size) + " rows");
  }
  Eigen::MatrixXd m(expected_size, expected_size);
  for (Eigen::Index i = 0; i < expected_size; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) !=
        expected_size) {
      throw std::runtime_error("correlation row " + std::to_string(i + 1) +
                               " has wrong length");
    }
    for (Eigen::Index j = 0; j < expected_size; ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  for (Eigen::Index i = 0; i < expected_size; ++i) {
    if (std::abs(m(i, i) - 1.0) > 1e-10) {
      throw std::runtime_error("correlation diagonal must be 1");
    }
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-10) {
        throw std::runtime_error("correlation matrix must be symmetric");
      }
    }
  }
  return m;
}

std::pair<Dataset, RelevanceMask> sample_dataset(const SimDesign& design,
                                                 RngStream& rng) {
  const int n = design.n;
  const Eigen::Index r = static_cast<Eigen::Index>(design.markers.size());
  if (n < 2 || r < 1) {
    throw std::invalid_argument("design must have n >= 2 and r >= 1");
  }
  for (const MarkerSim& m : design.markers) {
    // eta > 0 with |nu| < 0.5 keeps every per-class scale positive
    if (m.eta[0] <= 0.0 || m.eta[1] <= 0.0 || std::abs(m.nu) >= 0.5) {
      throw std::invalid_argument("marker '" + m.name +
                                  "' needs eta > 0 and |nu| < 0.5");
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(design.correlation);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "correlation matrix is not positive definite (Cholesky failed)");
  }
  const Eigen::MatrixXd chol_lower = llt.matrixL();

  const int n_cases = static_cast<int>(
      std::floor(design.case_proportion * static_cast<double>(n) + 1e-9));
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::fill(labels.begin(), labels.begin() + n_cases, 1);
  rng.shuffle(labels);

  Eigen::MatrixXd features(n, r);
  Eigen::VectorXd normals(r);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < r; ++k) {
      normals(k) = rng.normal();
    }
    const Eigen::VectorXd z = chol_lower * normals;
    const int y = labels[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < r; ++k) {
      const MarkerSim& m = design.markers[static_cast<std::size_t>(k)];
      const double mu = m.alpha[y] + m.beta * y;
      const double sigma = m.eta[y] * (1.0 + m.nu - 2.0 * m.nu * y);
      const double latent = mu + sigma * z(k);
      features(i, k) =
          m.psi[y] == Transform::expo ? std::exp(latent) : latent;
    }
  }

  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(r));
  for (const auto& m : design.markers) names.push_back(m.name);

  RelevanceMask mask;
  mask.relevant.reserve(static_cast<std::size_t>(r));
  for (const auto& m : design.markers) {
    mask.relevant.push_back(m.relevant() ? 1 : 0);
  }
  return {Dataset(std::move(features), std::move(labels), std::move(names)),
          std::move(mask)};
}

}  // namespace qbplab
