#include "sflr/bspline.hpp"

#include "sflr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace sflr {

namespace {

// (P_n(x), P_n'(x)) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one node");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

BSplineBasis::BSplineBasis(double domain_end, int degree, int interval_count)
    : domain_end_(domain_end), degree_(degree), interval_count_(interval_count) {
  if (!(domain_end > 0.0) || !std::isfinite(domain_end)) {
    throw InvalidArgument("BSplineBasis: domain end must be positive, got " +
                          std::to_string(domain_end));
  }
  if (degree < 1) {
    throw InvalidArgument("BSplineBasis: degree must be >= 1, got " + std::to_string(degree));
  }
  if (interval_count < 1) {
    throw InvalidArgument("BSplineBasis: interval count must be >= 1, got " +
                          std::to_string(interval_count));
  }
  knots_.reserve(interval_count + 1 + 2 * degree);
  for (int i = 0; i < degree; ++i) knots_.push_back(0.0);
  for (int k = 0; k <= interval_count; ++k) {
    knots_.push_back(k == interval_count ? domain_end : domain_end * k / interval_count);
  }
  for (int i = 0; i < degree; ++i) knots_.push_back(domain_end);
}

std::pair<double, double> BSplineBasis::interval(int j) const {
  if (j < 0 || j >= interval_count_) {
    throw InvalidArgument("BSplineBasis: interval index " + std::to_string(j) + " out of range");
  }
  return {knots_[j + degree_], knots_[j + degree_ + 1]};
}

void BSplineBasis::check_point(double t) const {
  if (!(t >= 0.0 && t <= domain_end_)) {
    throw InvalidArgument("BSplineBasis: point " + std::to_string(t) + " outside [0, " +
                          std::to_string(domain_end_) + "]");
  }
}

int BSplineBasis::interval_of(double t) const {
  check_point(t);
  int j = static_cast<int>(std::floor(t / interval_width()));
  j = std::clamp(j, 0, interval_count_ - 1);
  // Guard against rounding in t / h near a breakpoint.
  if (t < knots_[j + degree_] && j > 0) --j;
  if (t >= knots_[j + degree_ + 1] && j < interval_count_ - 1) ++j;
  return j;
}

Eigen::MatrixXd BSplineBasis::local_derivatives(int j, double t, int max_order) const {
  const int p = degree_;
  const int span = j + p;
  const auto& U = knots_;
  const int n_ord = std::min(max_order, p);

  // Cox-de Boor triangle with knot differences stored below the diagonal.
  Eigen::MatrixXd ndu(p + 1, p + 1);
  std::vector<double> left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int k = 1; k <= p; ++k) {
    left[k] = t - U[span + 1 - k];
    right[k] = U[span + k] - t;
    double saved = 0.0;
    for (int r = 0; r < k; ++r) {
      ndu(k, r) = right[r + 1] + left[k - r];
      const double temp = ndu(r, k - 1) / ndu(k, r);
      ndu(r, k) = saved + right[r + 1] * temp;
      saved = left[k - r] * temp;
    }
    ndu(k, k) = saved;
  }

  Eigen::MatrixXd ders = Eigen::MatrixXd::Zero(max_order + 1, p + 1);
  for (int c = 0; c <= p; ++c) ders(0, c) = ndu(c, p);

  // Derivative recurrence on the same triangle.
  Eigen::MatrixXd a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0;
    int s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= n_ord; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int jj = j1; jj <= j2; ++jj) {
        a(s2, jj) = (a(s1, jj) - a(s1, jj - 1)) / ndu(pk + 1, rk + jj);
        d += a(s2, jj) * ndu(rk + jj, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }

  double factor = p;
  for (int k = 1; k <= n_ord; ++k) {
    ders.row(k) *= factor;
    factor *= (p - k);
  }
  return ders;
}

Eigen::VectorXd BSplineBasis::eval(double t, int derivative_order) const {
  if (derivative_order < 0 || derivative_order > degree_) {
    throw InvalidArgument("BSplineBasis::eval: derivative order " +
                          std::to_string(derivative_order) + " outside [0, degree]");
  }
  const int j = interval_of(t);
  const Eigen::MatrixXd local = local_derivatives(j, t, derivative_order);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis_count());
  out.segment(j, degree_ + 1) = local.row(derivative_order).transpose();
  return out;
}

Eigen::MatrixXd BSplineBasis::eval_matrix(const std::vector<double>& ts,
                                          int derivative_order) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ts.size()), basis_count());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = eval(ts[i], derivative_order).transpose();
  }
  return out;
}

double BSplineBasis::eval_spline(const Eigen::VectorXd& coef, double t,
                                 int derivative_order) const {
  if (coef.size() != basis_count()) {
    throw InvalidArgument("BSplineBasis::eval_spline: coefficient length mismatch");
  }
  if (derivative_order < 0 || derivative_order > degree_) {
    throw InvalidArgument("BSplineBasis::eval_spline: derivative order out of range");
  }
  const int j = interval_of(t);
  const Eigen::MatrixXd local = local_derivatives(j, t, derivative_order);
  return local.row(derivative_order).dot(coef.segment(j, degree_ + 1));
}

Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> BSplineBasis::local_gram(int j,
                                                                                  int m) const {
  if (j < 0 || j >= interval_count_) {
    throw InvalidArgument("gram_block: interval index " + std::to_string(j) + " out of range");
  }
  if (m < 0 || m > degree_ - 1) {
    throw InvalidArgument("gram_block: derivative order " + std::to_string(m) +
                          " outside [0, degree-1]");
  }
  const auto [lo, hi] = interval(j);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  const GaussLegendreRule rule = gauss_legendre(degree_ - m + 1);

  const int k = degree_ + 1;
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  LMatrix local = LMatrix::Zero(k, k);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double t = mid + half * rule.nodes[q];
    const Eigen::VectorXd d = local_derivatives(j, t, m).row(m).transpose();
    const long double w = static_cast<long double>(rule.weights[q]) * half;
    for (int u = 0; u < k; ++u)
      for (int v = u; v < k; ++v) local(u, v) += w * d(u) * d(v);
  }
  // Exactly symmetric by construction.
  for (int u = 0; u < k; ++u)
    for (int v = 0; v < u; ++v) local(u, v) = local(v, u);
  return local;
}

Eigen::MatrixXd BSplineBasis::gram_block(int j, int m) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(basis_count(), basis_count());
  out.block(j, j, degree_ + 1, degree_ + 1) = local_gram(j, m).cast<double>();
  return out;
}

Eigen::MatrixXd BSplineBasis::gram(int m) const {
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  LMatrix acc = LMatrix::Zero(basis_count(), basis_count());
  for (int j = 0; j < interval_count_; ++j)
    acc.block(j, j, degree_ + 1, degree_ + 1) += local_gram(j, m);
  return acc.cast<double>();
}

BSplineBasis make_basis(double domain_end, int degree, int interval_count) {
  return BSplineBasis(domain_end, degree, interval_count);
}

int default_interval_count(int n_sampling_points) {
  if (n_sampling_points < 2) {
    throw InvalidArgument("default_interval_count: need at least two sampling points");
  }
  const double rule = 10.0 * std::pow(static_cast<double>(n_sampling_points), 2.0 / 9.0);
  return std::max(30, static_cast<int>(std::ceil(rule)));
}

}  // namespace sflr
