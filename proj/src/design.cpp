#include "sflr/design.hpp"

#include "sflr/errors.hpp"

#include <cmath>
#include <string>

namespace sflr {

Eigen::MatrixXd compute_U(const FunctionalDataset& data, const BSplineBasis& basis) {
  if (data.sample_count() == 0) throw DataError("compute_U: dataset has no samples");
  if (data.grid.size() < 2 || data.values.cols() != static_cast<Eigen::Index>(data.grid.size())) {
    throw DataError("compute_U: values do not match the sampling grid");
  }
  if (data.grid.front() < basis.domain_start() || data.grid.back() > basis.domain_end()) {
    throw DataError("compute_U: sampling grid [" + std::to_string(data.grid.front()) + ", " +
                    std::to_string(data.grid.back()) + "] outside basis domain [0, " +
                    std::to_string(basis.domain_end()) + "]");
  }
  const Eigen::MatrixXd E = basis.eval_matrix(data.grid);
  const Eigen::VectorXd w = trapezoid_weights(data.grid);
  return data.values * (w.asDiagonal() * E);
}

Eigen::MatrixXd compute_V(const BSplineBasis& basis, int m) {
  if (m < 1 || m > basis.degree() - 1) {
    throw InvalidArgument("compute_V: derivative order " + std::to_string(m) +
                          " must lie in [1, degree-1]");
  }
  return basis.gram(m);
}

std::vector<Eigen::MatrixXd> compute_W_blocks(const BSplineBasis& basis) {
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(basis.interval_count());
  for (int j = 0; j < basis.interval_count(); ++j) blocks.push_back(basis.gram_block(j, 0));
  return blocks;
}

DesignMatrices build_design(const FunctionalDataset& data, const BSplineBasis& basis, int m) {
  DesignMatrices d;
  d.U = compute_U(data, basis);
  d.V = compute_V(basis, m);
  d.W_blocks = compute_W_blocks(basis);
  d.m = m;
  return d;
}

}  // namespace sflr
