#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qbplab/dataset.hpp"
#include "qbplab/rng.hpp"

namespace qbplab {

enum class Transform { identity, expo };

// Per-biomarker generative settings. The latent value is
//   v = alpha[y] + beta * y + eta[y] * (1 + nu - 2 nu y) * z,
// with z standard normal (correlated across biomarkers) and the observed
// value psi[y](v). Per-class alpha/eta/psi allow designs where controls and
// cases follow different distribution families.
struct MarkerSim {
  std::string name;
  double alpha[2] = {0.0, 0.0};  // [control, case]
  double eta[2] = {1.0, 1.0};
  double beta = 0.0;  // case mean shift on the latent scale
  double nu = 0.0;    // case/control scale shift, |nu| < 0.5
  Transform psi[2] = {Transform::identity, Transform::identity};

  bool relevant() const;
};

struct SimDesign {
  std::string id;
  int n = 0;
  double case_proportion = 0.5;
  std::vector<MarkerSim> markers;
  Eigen::MatrixXd correlation;  // latent correlation, r x r

  SimDesign with_n(int subjects) const;
};

// Ground truth for selection metrics: biomarkers whose generative settings
// differ between cases and controls.
struct RelevanceMask {
  std::vector<std::uint8_t> relevant;
  int count() const;
};

const std::vector<std::string>& valid_design_ids();

// Builds one of the predefined 35-biomarker designs
// (1..5, 6a..6c, 7a..7c, 8a..8c) with the given latent correlation
// (identity by default).
SimDesign build_design(const std::string& id);
SimDesign build_design(const std::string& id,
                       const Eigen::MatrixXd& correlation);

// Square numeric CSV without header; must be symmetric with unit diagonal.
Eigen::MatrixXd load_correlation_csv(const std::string& path,
                                     Eigen::Index expected_size);

// Draws a dataset: floor(phi * n) cases, label order shuffled by the
// stream, latent rows from the Cholesky factor of the design correlation.
// Bit-reproducible for a given seed.
std::pair<Dataset, RelevanceMask> sample_dataset(const SimDesign& design,
                                                 RngStream& rng);

}  // namespace qbplab
