#include "sflr/solver.hpp"

#include "sflr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sflr {

namespace {

constexpr double kRcondLimit = 1e-12;
constexpr int kL1Nodes = 20;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Objective increase tolerated when accepting a step (floating-point noise).
// Compared as f_new - f so that rounding of f + slack cannot widen it.
constexpr double kDescentSlack = 1e-12;

double relative_step(const Eigen::VectorXd& next, const Eigen::VectorXd& prev) {
  return (next - prev).lpNorm<Eigen::Infinity>() / std::max(1.0, prev.lpNorm<Eigen::Infinity>());
}

void check_dims(const Eigen::MatrixXd& U, const Eigen::VectorXd& y, const char* where) {
  if (U.rows() != y.size()) {
    throw InvalidArgument(std::string(where) + ": design has " + std::to_string(U.rows()) +
                          " rows but " + std::to_string(y.size()) + " labels");
  }
}

// Smooth part of the exact objective: -loglik + b' V_star b.
double smooth_objective(const Eigen::VectorXd& theta, const Eigen::MatrixXd& U_aug,
                        const Eigen::VectorXd& y, const Eigen::MatrixXd& V_star_aug, double clamp) {
  const Eigen::VectorXd eta = U_aug * theta;
  double ll = 0.0;
  const double lo = std::log(clamp);
  const double hi = std::log1p(-clamp);
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double p = logistic(eta(i));
    if (p < clamp || p > 1.0 - clamp) {
      const bool high = p > 1.0 - clamp;
      ll += y(i) * (high ? hi : lo) + (1.0 - y(i)) * (high ? lo : hi);
    } else {
      ll += y(i) * eta(i) - softplus(eta(i));
    }
  }
  return -ll + theta.dot(V_star_aug * theta);
}

struct SolveOutcome {
  Eigen::VectorXd x;
  double rcond = 0.0;
  bool pseudo = false;
};

SolveOutcome solve_spd(const Eigen::MatrixXd& H, const Eigen::VectorXd& rhs) {
  if (!H.allFinite() || !rhs.allFinite()) {
    throw NumericalError("newton_step: non-finite Hessian or gradient");
  }
  SolveOutcome out;
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() == Eigen::Success) {
    out.rcond = llt.rcond();
    if (out.rcond >= kRcondLimit) {
      out.x = llt.solve(rhs);
      return out;
    }
  }
  // Pseudo-solve: drop eigen-directions below the condition limit.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double top = std::max(ev.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev(k) > kRcondLimit * top) inv(k) = 1.0 / ev(k);
  }
  out.x = eig.eigenvectors() * (inv.asDiagonal() * (eig.eigenvectors().transpose() * rhs));
  out.rcond = std::max(ev.minCoeff(), 0.0) / top;
  out.pseudo = true;
  return out;
}

// Intercept-augmented Hessian and negative gradient of the surrogate.
void surrogate_system(const Eigen::VectorXd& theta, const Eigen::MatrixXd& U_aug,
                      const Eigen::VectorXd& y, const Eigen::MatrixXd& penalty, double clamp,
                      Eigen::MatrixXd& hessian, Eigen::VectorXd& neg_gradient,
                      Eigen::MatrixXd* info = nullptr) {
  const Eigen::VectorXd c = clamped_probabilities(U_aug * theta, clamp);
  const Eigen::VectorXd d = c.array() * (1.0 - c.array());
  Eigen::MatrixXd fisher = U_aug.transpose() * d.asDiagonal() * U_aug;
  neg_gradient = U_aug.transpose() * (y - c) - 2.0 * (penalty * theta);
  hessian = fisher + 2.0 * penalty;
  if (info) *info = std::move(fisher);
}

// Newton step over the active coordinates only; the others stay at zero.
NewtonStepResult restricted_newton_step(const Eigen::VectorXd& theta, const Eigen::MatrixXd& U_aug,
                                        const Eigen::VectorXd& y, const Eigen::MatrixXd& penalty,
                                        double clamp, const std::vector<int>& active) {
  Eigen::MatrixXd H;
  Eigen::VectorXd rhs;
  surrogate_system(theta, U_aug, y, penalty, clamp, H, rhs);
  const auto k = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd Ha(k, k);
  Eigen::VectorXd ra(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    ra(a) = rhs(active[a]);
    for (Eigen::Index c = 0; c < k; ++c) Ha(a, c) = H(active[a], active[c]);
  }
  const SolveOutcome s = solve_spd(Ha, ra);
  NewtonStepResult out{Eigen::VectorXd::Zero(theta.size()), s.rcond, s.pseudo};
  for (Eigen::Index a = 0; a < k; ++a) out.theta(active[a]) = theta(active[a]) + s.x(a);
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(lambda >= 0.0) || !(gamma >= 0.0)) {
    throw InvalidArgument("SolverConfig: lambda and gamma must be nonnegative");
  }
  if (m < 1) throw InvalidArgument("SolverConfig: derivative order m must be >= 1");
  if (!(prob_clamp_delta > 0.0 && prob_clamp_delta < 0.5)) {
    throw InvalidArgument("SolverConfig: probability clamp must lie in (0, 0.5)");
  }
  if (!(coef_threshold_epsilon >= 0.0) || !(norm_floor >= 0.0)) {
    throw InvalidArgument("SolverConfig: thresholds must be nonnegative");
  }
  if (!(tolerance > 0.0)) throw InvalidArgument("SolverConfig: tolerance must be positive");
  if (max_iterations < 1 || step_halving_max < 0) {
    throw InvalidArgument("SolverConfig: iteration limits must be positive");
  }
}

Eigen::VectorXd Coefficients::stacked() const {
  Eigen::VectorXd theta(b.size() + 1);
  theta(0) = alpha;
  theta.tail(b.size()) = b;
  return theta;
}

Coefficients Coefficients::from_stacked(const Eigen::VectorXd& theta) {
  return {theta(0), theta.tail(theta.size() - 1)};
}

Eigen::VectorXd clamped_probabilities(const Eigen::VectorXd& eta, double clamp) {
  Eigen::VectorXd p(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    p(i) = std::clamp(logistic(eta(i)), clamp, 1.0 - clamp);
  }
  return p;
}

double log_likelihood(const Eigen::VectorXd& b, double alpha, const Eigen::MatrixXd& U,
                      const Eigen::VectorXd& y, double clamp) {
  check_dims(U, y, "log_likelihood");
  if (U.cols() != b.size()) {
    throw InvalidArgument("log_likelihood: design has " + std::to_string(U.cols()) +
                          " columns but " + std::to_string(b.size()) + " coefficients");
  }
  if (!(clamp > 0.0 && clamp < 0.5)) throw InvalidArgument("log_likelihood: clamp outside (0, 0.5)");
  const Eigen::VectorXd theta = Coefficients{alpha, b}.stacked();
  const Eigen::MatrixXd none = Eigen::MatrixXd::Zero(theta.size(), theta.size());
  return -smooth_objective(theta, augment_design(U), y, none, clamp);
}

double l1_norm(const BSplineBasis& basis, const Eigen::VectorXd& b) {
  static const GaussLegendreRule rule = gauss_legendre(kL1Nodes);
  const int d = basis.degree();
  double total = 0.0;
  for (int j = 0; j < basis.interval_count(); ++j) {
    const auto [lo, hi] = basis.interval(j);
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    const Eigen::VectorXd local = b.segment(j, d + 1);
    if (local.isZero(0.0)) continue;
    for (int q = 0; q < kL1Nodes; ++q) {
      const double t = mid + half * rule.nodes[q];
      const double value = basis.local_derivatives(j, t, 0).row(0).dot(local);
      total += rule.weights[q] * half * std::abs(value);
    }
  }
  return total;
}

double penalized_objective(const Coefficients& coef, const Eigen::MatrixXd& U,
                           const Eigen::VectorXd& y, const Eigen::MatrixXd& V,
                           const BSplineBasis& basis, double lambda, double gamma, double clamp) {
  const double ll = log_likelihood(coef.b, coef.alpha, U, y, clamp);
  return -ll + gamma * coef.b.dot(V * coef.b) + lambda * l1_norm(basis, coef.b);
}

Eigen::VectorXd subinterval_norms(const Eigen::VectorXd& b,
                                  const std::vector<Eigen::MatrixXd>& W_blocks) {
  Eigen::VectorXd norms(static_cast<Eigen::Index>(W_blocks.size()));
  for (std::size_t j = 0; j < W_blocks.size(); ++j) {
    norms(static_cast<Eigen::Index>(j)) = std::sqrt(std::max(0.0, b.dot(W_blocks[j] * b)));
  }
  return norms;
}

Eigen::MatrixXd lqa_weight_matrix(const Eigen::VectorXd& b_current,
                                  const std::vector<Eigen::MatrixXd>& W_blocks, double lambda,
                                  double domain_end, int interval_count, double norm_floor) {
  if (!(lambda >= 0.0)) throw InvalidArgument("lqa_weight_matrix: lambda must be nonnegative");
  const auto L = b_current.size();
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(L, L);
  if (lambda == 0.0) return W;
  const Eigen::VectorXd norms = subinterval_norms(b_current, W_blocks);
  for (std::size_t j = 0; j < W_blocks.size(); ++j) {
    W += W_blocks[j] / std::max(norms(static_cast<Eigen::Index>(j)), norm_floor);
  }
  return (0.5 * lambda * std::sqrt(domain_end / interval_count)) * W;
}

Eigen::MatrixXd augment_design(const Eigen::MatrixXd& U) {
  Eigen::MatrixXd out(U.rows(), U.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(U.cols()) = U;
  return out;
}

Eigen::MatrixXd pad_penalty(const Eigen::MatrixXd& P) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(P.rows() + 1, P.cols() + 1);
  out.bottomRightCorner(P.rows(), P.cols()) = P;
  return out;
}

SurrogateDerivatives surrogate_objective(const Eigen::VectorXd& theta, const Eigen::MatrixXd& U_aug,
                                         const Eigen::VectorXd& y, const Eigen::MatrixXd& V_star,
                                         const Eigen::MatrixXd& W_star, double clamp) {
  check_dims(U_aug, y, "surrogate_objective");
  const Eigen::MatrixXd penalty = V_star + W_star;
  SurrogateDerivatives out;
  out.value = smooth_objective(theta, U_aug, y, penalty, clamp);
  Eigen::VectorXd neg_gradient;
  surrogate_system(theta, U_aug, y, penalty, clamp, out.hessian, neg_gradient);
  out.gradient = -neg_gradient;
  return out;
}

NewtonStepResult newton_step(const Eigen::VectorXd& theta_old, const Eigen::MatrixXd& U_aug,
                             const Eigen::VectorXd& y, const Eigen::MatrixXd& V_star,
                             const Eigen::MatrixXd& W_star, double clamp) {
  check_dims(U_aug, y, "newton_step");
  const auto P = theta_old.size();
  if (U_aug.cols() != P || V_star.rows() != P || V_star.cols() != P || W_star.rows() != P ||
      W_star.cols() != P) {
    throw InvalidArgument("newton_step: parameter dimension mismatch");
  }
  Eigen::MatrixXd H;
  Eigen::VectorXd rhs;
  surrogate_system(theta_old, U_aug, y, V_star + W_star, clamp, H, rhs);
  const SolveOutcome s = solve_spd(H, rhs);
  return {theta_old + s.x, s.rcond, s.pseudo};
}

InitialFit fit_initial(const Eigen::MatrixXd& U, const Eigen::VectorXd& y,
                       const Eigen::MatrixXd& V_star, const SolverConfig& config) {
  config.validate();
  check_dims(U, y, "fit_initial");
  const Eigen::MatrixXd U_aug = augment_design(U);
  const Eigen::MatrixXd V_aug = pad_penalty(V_star);
  const Eigen::MatrixXd W_zero = Eigen::MatrixXd::Zero(V_aug.rows(), V_aug.cols());
  const double clamp = config.prob_clamp_delta;

  InitialFit out;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(U.cols() + 1);
  double f = smooth_objective(theta, U_aug, y, V_aug, clamp);
  for (int it = 1; it <= config.max_iterations; ++it) {
    out.iterations = it;
    const NewtonStepResult step = newton_step(theta, U_aug, y, V_aug, W_zero, clamp);
    out.pseudo_solves += step.pseudo_solve ? 1 : 0;
    Eigen::VectorXd direction = step.theta - theta;
    Eigen::VectorXd candidate = step.theta;
    double f_new = smooth_objective(candidate, U_aug, y, V_aug, clamp);
    for (int h = 0; h < config.step_halving_max && !(f_new - f <= kDescentSlack); ++h) {
      direction *= 0.5;
      candidate = theta + direction;
      f_new = smooth_objective(candidate, U_aug, y, V_aug, clamp);
    }
    if (!(f_new - f <= kDescentSlack)) break;
    const double rel = relative_step(candidate, theta);
    theta = candidate;
    f = f_new;
    if (rel < config.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.coef = Coefficients::from_stacked(theta);
  return out;
}

FitResult fit(const Eigen::MatrixXd& U, const Eigen::VectorXd& y, const BSplineBasis& basis,
              const DesignMatrices& design, const SolverConfig& config,
              const std::optional<Coefficients>& warm_start) {
  config.validate();
  check_dims(U, y, "fit");
  const int L = basis.basis_count();
  const int M = basis.interval_count();
  const double T = basis.domain_end();
  if (U.cols() != L || design.V.rows() != L ||
      static_cast<int>(design.W_blocks.size()) != M) {
    throw InvalidArgument("fit: design matrices do not match the basis");
  }
  if (U.rows() < 2) throw InvalidArgument("fit: need at least two samples");

  FitResult result;
  result.lambda = config.lambda;
  result.gamma = config.gamma;
  const double ones = y.sum();
  result.degenerate_labels = (ones == 0.0 || ones == static_cast<double>(y.size()));

  const double clamp = config.prob_clamp_delta;
  const Eigen::MatrixXd U_aug = augment_design(U);
  const Eigen::MatrixXd V_star = config.gamma * design.V;
  const Eigen::MatrixXd V_aug = pad_penalty(V_star);

  auto objective = [&](const Eigen::VectorXd& theta) {
    return penalized_objective(Coefficients::from_stacked(theta), U, y, design.V, basis,
                               config.lambda, config.gamma, clamp);
  };
  auto lqa = [&](const Eigen::VectorXd& theta) {
    return pad_penalty(lqa_weight_matrix(theta.tail(L), design.W_blocks, config.lambda, T, M,
                                         config.norm_floor));
  };

  Eigen::VectorXd theta;
  bool start_converged = true;
  if (warm_start) {
    if (warm_start->b.size() != L) throw InvalidArgument("fit: warm start has wrong length");
    theta = warm_start->stacked();
  } else {
    const InitialFit init = fit_initial(U, y, V_star, config);
    theta = init.coef.stacked();
    result.initial_iterations = init.iterations;
    result.pseudo_solves += init.pseudo_solves;
    start_converged = init.converged;
  }

  // Coordinates taking part in the iterations: the intercept and every
  // coefficient not deleted (exactly zero in a warm start or after
  // thresholding).
  auto active_of = [&](const Eigen::VectorXd& th, bool delete_zeros) {
    std::vector<int> active{0};
    for (int l = 1; l <= L; ++l) {
      if (!delete_zeros || th(l) != 0.0) active.push_back(l);
    }
    return active;
  };

  // Damped LQA Newton iterations from theta; accepted objective values are
  // appended to `trace` when given.
  struct RunOutcome {
    bool converged = false;
    int iterations = 0;
    std::string status = "max_iterations";
  };
  auto run = [&](Eigen::VectorXd& theta, const std::vector<int>& active,
                 std::vector<double>* trace) {
    RunOutcome out;
    const bool full = static_cast<int>(active.size()) == L + 1;
    double f = objective(theta);
    if (trace) trace->push_back(f);
    for (int it = 1; it <= config.max_iterations; ++it) {
      out.iterations = it;
      const NewtonStepResult step =
          full ? newton_step(theta, U_aug, y, V_aug, lqa(theta), clamp)
               : restricted_newton_step(theta, U_aug, y, V_aug + lqa(theta), clamp, active);
      result.pseudo_solves += step.pseudo_solve ? 1 : 0;
      Eigen::VectorXd direction = step.theta - theta;
      Eigen::VectorXd candidate = step.theta;
      double f_new = objective(candidate);
      for (int h = 0; h < config.step_halving_max && !(f_new - f <= kDescentSlack); ++h) {
        direction *= 0.5;
        candidate = theta + direction;
        f_new = objective(candidate);
      }
      if (!(f_new - f <= kDescentSlack)) {
        // Line search exhausted. Converged when the smallest tried step is
        // already below tolerance.
        out.converged = relative_step(candidate, theta) <= config.tolerance;
        out.status = out.converged ? "converged" : "stalled";
        break;
      }
      const double rel = relative_step(candidate, theta);
      theta = candidate;
      f = f_new;
      if (trace) trace->push_back(f);
      if (rel < config.tolerance) {
        out.converged = true;
        out.status = "converged";
        break;
      }
    }
    return out;
  };

  // Coefficient thresholding, then null subintervals and the coefficients
  // supported on them.
  const double eps = config.coef_threshold_epsilon;
  const double scale = std::sqrt(T / M);
  const int d = basis.degree();
  auto null_mask_of = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd norms = subinterval_norms(b, design.W_blocks);
    std::vector<bool> mask(M);
    for (int j = 0; j < M; ++j) mask[j] = norms(j) / scale < eps;
    return mask;
  };
  auto threshold = [&](const Eigen::VectorXd& th) {
    Coefficients c = Coefficients::from_stacked(th);
    for (Eigen::Index l = 0; l < L; ++l) {
      if (std::abs(c.b(l)) < eps) c.b(l) = 0.0;
    }
    const std::vector<bool> mask = null_mask_of(c.b);
    for (int j = 0; j < M; ++j) {
      if (mask[j]) c.b.segment(j, d + 1).setZero();
    }
    return c;
  };

  const RunOutcome main = run(theta, active_of(theta, warm_start.has_value()),
                              &result.objective_trace);
  result.iterations = main.iterations;
  result.converged = main.converged;
  result.status = main.status;
  Coefficients coef = threshold(theta);

  // Polish: thresholding moves the estimate off the fixed point. Re-solve
  // with the zeroed coefficients deleted until thresholding changes nothing.
  // The deleted set only grows, so this terminates.
  while (result.converged) {
    const Eigen::VectorXd restart = coef.stacked();
    if (restart == theta) break;
    theta = restart;
    const RunOutcome polish = run(theta, active_of(theta, true), nullptr);
    result.polish_iterations += polish.iterations;
    result.converged = polish.converged;
    result.status = polish.status;
    coef = threshold(theta);
  }
  if (!start_converged && !result.converged) result.status = "initialization_not_converged";
  if (result.degenerate_labels) result.status = "degenerate_labels";

  result.null_mask = null_mask_of(coef.b);
  result.b = coef.b;
  result.alpha = coef.alpha;

  const Eigen::VectorXd theta_final = coef.stacked();
  result.final_objective = objective(theta_final);
  result.loglik = log_likelihood(coef.b, coef.alpha, U, y, clamp);
  result.fitted_probabilities = clamped_probabilities(U_aug * theta_final, clamp);

  // Effective degrees of freedom trace(H^{-1} U'DU) over the undeleted
  // parameters at the returned estimate.
  Eigen::MatrixXd H;
  Eigen::VectorXd unused;
  Eigen::MatrixXd fisher;
  surrogate_system(theta_final, U_aug, y, V_aug + lqa(theta_final), clamp, H, unused, &fisher);
  const std::vector<int> active = active_of(theta_final, true);
  const auto k = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd Ha(k, k), Fa(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index c = 0; c < k; ++c) {
      Ha(a, c) = H(active[a], active[c]);
      Fa(a, c) = fisher(active[a], active[c]);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(Ha);
  if (llt.info() == Eigen::Success) {
    result.df = llt.solve(Fa).trace();
  } else {
    result.df = Ha.completeOrthogonalDecomposition().pseudoInverse().cwiseProduct(Fa.transpose()).sum();
  }
  return result;
}

}  // namespace sflr
