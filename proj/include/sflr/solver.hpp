#pragma once

#include "sflr/bspline.hpp"
#include "sflr/design.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace sflr {

struct SolverConfig {
  double lambda = 0.0;                   ///< sparsity weight
  double gamma = 0.0;                    ///< roughness weight
  int m = 2;                             ///< roughness derivative order
  double prob_clamp_delta = 1e-5;        ///< probabilities kept in [delta, 1-delta]
  double coef_threshold_epsilon = 1e-4;  ///< final coefficient / null threshold
  double norm_floor = 1e-8;              ///< LQA denominator guard
  int max_iterations = 100;
  double tolerance = 1e-6;               ///< relative infinity-norm step
  int step_halving_max = 20;

  void validate() const;
};

/// Intercept plus spline coefficients.
struct Coefficients {
  double alpha = 0.0;
  Eigen::VectorXd b;

  /// (alpha, b_1, ..., b_L)
  Eigen::VectorXd stacked() const;
  static Coefficients from_stacked(const Eigen::VectorXd& theta);
};

struct FitResult {
  Eigen::VectorXd b;
  double alpha = 0.0;
  std::vector<bool> null_mask;  ///< per subinterval, true = beta is zero there
  int iterations = 0;           ///< sparsity-stage Newton iterations
  int initial_iterations = 0;   ///< iterations of the roughness-only start
  int polish_iterations = 0;    ///< iterations after deleting thresholded coefficients
  bool converged = false;
  bool degenerate_labels = false;
  double final_objective = 0.0;
  double loglik = 0.0;
  double df = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;
  int pseudo_solves = 0;  ///< Newton systems solved by the pseudo-inverse fallback
  std::string status;
  std::vector<double> objective_trace;  ///< objective after each accepted iterate
  Eigen::VectorXd fitted_probabilities;  ///< clamped c at the returned estimate

  Coefficients coefficients() const { return {alpha, b}; }
};

/// Logistic probabilities of eta clamped to [clamp, 1 - clamp].
Eigen::VectorXd clamped_probabilities(const Eigen::VectorXd& eta, double clamp);

/// sum_i y_i eta_i - log(1 + exp(eta_i)), with the implied probability
/// clamped to [clamp, 1 - clamp].
double log_likelihood(const Eigen::VectorXd& b, double alpha, const Eigen::MatrixXd& U,
                      const Eigen::VectorXd& y, double clamp);

/// int_0^T |beta(t)| dt by 20-point Gauss-Legendre on each subinterval.
double l1_norm(const BSplineBasis& basis, const Eigen::VectorXd& b);

/// -loglik + gamma b'Vb + lambda int |beta|.
double penalized_objective(const Coefficients& coef, const Eigen::MatrixXd& U,
                           const Eigen::VectorXd& y, const Eigen::MatrixXd& V,
                           const BSplineBasis& basis, double lambda, double gamma,
                           double clamp);

/// Subinterval norms ||beta_[j]||_2 = sqrt(b' W_j b).
Eigen::VectorXd subinterval_norms(const Eigen::VectorXd& b,
                                  const std::vector<Eigen::MatrixXd>& W_blocks);

/// LQA weight (lambda sqrt(T/M) / 2) sum_j W_j / max(||beta_[j]||, floor),
/// so that b' W b approximates lambda int |beta| up to a constant.
Eigen::MatrixXd lqa_weight_matrix(const Eigen::VectorXd& b_current,
                                  const std::vector<Eigen::MatrixXd>& W_blocks, double lambda,
                                  double domain_end, int interval_count, double norm_floor);

/// [1, U]
Eigen::MatrixXd augment_design(const Eigen::MatrixXd& U);

/// Embeds an L x L penalty in the (L+1) x (L+1) intercept-augmented space.
Eigen::MatrixXd pad_penalty(const Eigen::MatrixXd& P);

/// Quadratic-approximation objective
///   Q(theta) = -l(theta) + b'V*b + b'W*b
/// with its gradient and Hessian. V* and W* are intercept-padded; the
/// likelihood curvature uses the clamped probabilities.
struct SurrogateDerivatives {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

SurrogateDerivatives surrogate_objective(const Eigen::VectorXd& theta, const Eigen::MatrixXd& U_aug,
                                         const Eigen::VectorXd& y, const Eigen::MatrixXd& V_star,
                                         const Eigen::MatrixXd& W_star, double clamp);

struct NewtonStepResult {
  Eigen::VectorXd theta;
  double rcond = 0.0;         ///< reciprocal condition estimate of the Hessian
  bool pseudo_solve = false;  ///< Cholesky failed or rcond < 1e-12
};

/// One Newton update theta - H^{-1} g of the quadratic-approximation
/// objective, with H solved by Cholesky (pseudo-inverse fallback).
NewtonStepResult newton_step(const Eigen::VectorXd& theta_old, const Eigen::MatrixXd& U_aug,
                             const Eigen::VectorXd& y, const Eigen::MatrixXd& V_star,
                             const Eigen::MatrixXd& W_star, double clamp);

struct InitialFit {
  Coefficients coef;
  int iterations = 0;
  bool converged = false;
  int pseudo_solves = 0;
};

/// Roughness-only penalized logistic fit (no sparsity term). V_star = gamma V.
InitialFit fit_initial(const Eigen::MatrixXd& U, const Eigen::VectorXd& y,
                       const Eigen::MatrixXd& V_star, const SolverConfig& config);

/// Full doubly-penalized fit. When `warm_start` is given the roughness-only
/// initialization is skipped and its exactly-zero coefficients stay deleted.
/// After the first convergence, coefficients zeroed by thresholding are
/// deleted and the remaining ones re-solved until thresholding is stable.
FitResult fit(const Eigen::MatrixXd& U, const Eigen::VectorXd& y, const BSplineBasis& basis,
              const DesignMatrices& design, const SolverConfig& config,
              const std::optional<Coefficients>& warm_start = std::nullopt);

}  // namespace sflr
