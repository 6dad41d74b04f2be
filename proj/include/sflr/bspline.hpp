#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace sflr {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendreRule gauss_legendre(int n);

/// Clamped B-spline basis on [0, T] with M equally spaced subintervals.
///
/// The knot vector repeats each endpoint degree+1 times, so the basis has
/// L = M + degree functions. Basis function l is supported on subintervals
/// l-degree .. l (0-based, clipped to [0, M)). Immutable after construction.
class BSplineBasis {
 public:
  BSplineBasis(double domain_end, int degree, int interval_count);

  double domain_start() const { return 0.0; }
  double domain_end() const { return domain_end_; }
  int degree() const { return degree_; }
  int interval_count() const { return interval_count_; }
  int basis_count() const { return interval_count_ + degree_; }
  double interval_width() const { return domain_end_ / interval_count_; }
  const std::vector<double>& knots() const { return knots_; }

  /// Breakpoints t_j of subinterval j: [t_j, t_{j+1}].
  std::pair<double, double> interval(int j) const;

  /// Index j of the subinterval containing t; t = T maps to the last one.
  int interval_of(double t) const;

  /// Derivatives of order 0..max_order of the degree+1 functions that are
  /// nonzero on subinterval `j`, evaluated at t. Row k holds order k;
  /// column c is basis function j + c.
  Eigen::MatrixXd local_derivatives(int j, double t, int max_order) const;

  /// Full length-L vector of e_l^{(order)}(t).
  Eigen::VectorXd eval(double t, int derivative_order = 0) const;

  /// Basis values (or derivatives) at many points: rows are points.
  Eigen::MatrixXd eval_matrix(const std::vector<double>& ts, int derivative_order = 0) const;

  /// Spline value sum_l coef_l e_l^{(order)}(t).
  double eval_spline(const Eigen::VectorXd& coef, double t, int derivative_order = 0) const;

  /// Integral over subinterval j of e^{(m)}(t) e^{(m)}(t)^T, exact by
  /// Gauss-Legendre with degree-m+1 nodes.
  Eigen::MatrixXd gram_block(int j, int m) const;

  /// Sum of gram_block(j, m) over all subintervals.
  Eigen::MatrixXd gram(int m) const;

 private:
  void check_point(double t) const;
  /// (degree+1)-square block of gram_block(j, m), accumulated in long double.
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> local_gram(int j, int m) const;

  double domain_end_;
  int degree_;
  int interval_count_;
  std::vector<double> knots_;
};

BSplineBasis make_basis(double domain_end, int degree, int interval_count);

/// Default interval count for a predictor sampled at n points:
/// M = max(30, 10 n^{2/9}), rounded up.
int default_interval_count(int n_sampling_points);

}  // namespace sflr
