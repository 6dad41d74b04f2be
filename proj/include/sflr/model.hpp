#pragma once

#include "sflr/bspline.hpp"
#include "sflr/dataset.hpp"
#include "sflr/interval.hpp"
#include "sflr/solver.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace sflr {

/// A fitted coefficient function with its basis. Immutable after fit.
class SflrModel {
 public:
  SflrModel(BSplineBasis basis, FitResult fit, int roughness_order = 2,
            std::vector<double> training_grid = {});

  const BSplineBasis& basis() const { return basis_; }
  const FitResult& fit() const { return fit_; }
  const std::vector<double>& training_grid() const { return training_grid_; }
  int roughness_order() const { return m_; }

  /// beta_hat(t) = e(t)'b, exactly zero inside null subintervals.
  double beta_hat(double t) const;

  /// logistic(alpha + U_i b) for each curve of `newdata`.
  Eigen::VectorXd predict_proba(const FunctionalDataset& newdata) const;

  /// Maximal runs of null subintervals as [start, end] pairs.
  std::vector<Interval> null_regions() const;

  /// {domain, degree, M, b, alpha, null_mask, lambda, gamma, m, diagnostics}
  std::string to_json(int indent = 2) const;
  static SflrModel from_json(const std::string& text);

 private:
  BSplineBasis basis_;
  FitResult fit_;
  int m_ = 2;
  std::vector<double> training_grid_;
};

/// Builds the design for `data` and fits. Requires labels.
SflrModel fit_model(const FunctionalDataset& data, const BSplineBasis& basis,
                    const SolverConfig& config);

/// 1 where p >= threshold, else 0.
Eigen::VectorXd classify(const Eigen::VectorXd& probabilities, double threshold = 0.5);

}  // namespace sflr
