#pragma once

#include "sflr/bspline.hpp"
#include "sflr/dataset.hpp"

#include <Eigen/Dense>

#include <vector>

namespace sflr {

/// Data-dependent design U and the data-free penalty matrices V and W_j.
struct DesignMatrices {
  Eigen::MatrixXd U;                    ///< N x L, U_i = int x_i(t) e(t) dt
  Eigen::MatrixXd V;                    ///< L x L roughness Gram of order m
  std::vector<Eigen::MatrixXd> W_blocks;  ///< M blocks, int_{I_j} e e^T
  int m = 2;
};

/// Row i approximates int x_i(t) e(t) dt by the trapezoid rule on the
/// sampling grid, with the basis evaluated exactly at the grid points.
Eigen::MatrixXd compute_U(const FunctionalDataset& data, const BSplineBasis& basis);

/// Roughness matrix: int e^{(m)} e^{(m)T} over [0, T]; requires 1 <= m <= d-1.
Eigen::MatrixXd compute_V(const BSplineBasis& basis, int m);

/// Per-subinterval order-0 Gram blocks.
std::vector<Eigen::MatrixXd> compute_W_blocks(const BSplineBasis& basis);

DesignMatrices build_design(const FunctionalDataset& data, const BSplineBasis& basis, int m);

}  // namespace sflr
