#include "sflr/dataset.hpp"

#include "sflr/errors.hpp"

#include <string>

namespace sflr {

void FunctionalDataset::validate() const {
  if (grid.size() < 2) throw DataError("dataset: grid needs at least two points");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) {
      throw DataError("dataset: grid not strictly increasing at position " + std::to_string(k));
    }
  }
  if (values.cols() != static_cast<Eigen::Index>(grid.size())) {
    throw DataError("dataset: value columns (" + std::to_string(values.cols()) +
                    ") do not match grid size (" + std::to_string(grid.size()) + ")");
  }
  if (labels) {
    if (labels->size() != values.rows()) {
      throw DataError("dataset: label count does not match sample count");
    }
    for (Eigen::Index i = 0; i < labels->size(); ++i) {
      const double y = (*labels)(i);
      if (y != 0.0 && y != 1.0) {
        throw DataError("dataset: label at row " + std::to_string(i) + " is not 0 or 1");
      }
    }
  }
}

FunctionalDataset FunctionalDataset::rows(const std::vector<int>& index) const {
  FunctionalDataset out;
  out.grid = grid;
  out.values.resize(static_cast<Eigen::Index>(index.size()), values.cols());
  if (labels) out.labels = Eigen::VectorXd(static_cast<Eigen::Index>(index.size()));
  for (std::size_t r = 0; r < index.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    out.values.row(i) = values.row(index[r]);
    if (labels) (*out.labels)(i) = (*labels)(index[r]);
  }
  return out;
}

Eigen::VectorXd trapezoid_weights(const std::vector<double>& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double h = grid[k + 1] - grid[k];
    w(k) += 0.5 * h;
    w(k + 1) += 0.5 * h;
  }
  return w;
}

std::vector<double> linspace(double start, double end, int n) {
  if (n < 2) throw InvalidArgument("linspace: need at least two points");
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = start + (end - start) * k / (n - 1);
  out.back() = end;
  return out;
}

}  // namespace sflr
