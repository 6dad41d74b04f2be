#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace sflr {

/// Curves sampled on one shared grid, optionally with binary labels.
struct FunctionalDataset {
  std::vector<double> grid;               ///< strictly increasing, size n >= 2
  Eigen::MatrixXd values;                 ///< N x n, row i is x_i on the grid
  std::optional<Eigen::VectorXd> labels;  ///< N entries in {0, 1}

  Eigen::Index sample_count() const { return values.rows(); }
  Eigen::Index point_count() const { return values.cols(); }
  bool has_labels() const { return labels.has_value(); }

  /// Throws DataError when the invariants above do not hold.
  void validate() const;

  /// Subset of rows, in the given order.
  FunctionalDataset rows(const std::vector<int>& index) const;
};

/// Composite-trapezoid weights for integrating over the sampling grid.
Eigen::VectorXd trapezoid_weights(const std::vector<double>& grid);

/// n equally spaced points on [start, end], endpoints included.
std::vector<double> linspace(double start, double end, int n);

}  // namespace sflr
