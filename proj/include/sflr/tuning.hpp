#pragma once

#include "sflr/bspline.hpp"
#include "sflr/dataset.hpp"
#include "sflr/design.hpp"
#include "sflr/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sflr {

enum class Criterion { BIC, AIC, CV };
enum class CvLoss { Deviance, MCR };

Criterion parse_criterion(const std::string& name);
std::string to_string(Criterion c);

struct TuningGrid {
  std::vector<double> lambdas;
  std::vector<double> gammas;
  Criterion criterion = Criterion::BIC;
  int folds = 5;
  CvLoss cv_loss = CvLoss::Deviance;
  std::uint64_t seed = 1;  ///< fold shuffling

  void validate(Eigen::Index sample_count) const;
};

struct ScoreRow {
  double lambda = 0.0;
  double gamma = 0.0;
  Criterion criterion = Criterion::BIC;
  double score = 0.0;  ///< +inf when a fit did not converge
  bool converged = false;
};

struct TuningResult {
  double lambda = 0.0;
  double gamma = 0.0;
  double score = 0.0;
  std::vector<ScoreRow> table;  ///< lambda-major grid order
};

/// BIC = -2 loglik + log(N) df, AIC = -2 loglik + 2 df. Throws on a
/// non-converged fit or on Criterion::CV.
double score_ic(const FitResult& fit, Eigen::Index N, Criterion criterion);

/// Fold index per sample: classes are shuffled separately with `seed` and
/// dealt round-robin, so each fold keeps the global class balance.
std::vector<int> stratified_folds(const Eigen::VectorXd& y, int folds, std::uint64_t seed);

/// Fits every (lambda, gamma) pair and returns the minimizer; ties go to the
/// larger lambda, then the larger gamma. `parallel` spreads grid points and
/// folds over worker threads; results do not depend on it.
TuningResult tune(const Eigen::MatrixXd& U, const Eigen::VectorXd& y, const BSplineBasis& basis,
                  const DesignMatrices& design, const TuningGrid& grid, const SolverConfig& config,
                  bool parallel = true);

TuningResult tune(const FunctionalDataset& data, const BSplineBasis& basis, const TuningGrid& grid,
                  const SolverConfig& config, bool parallel = true);

/// "lambda,gamma,criterion,score,converged" rows.
std::string score_table_csv(const std::vector<ScoreRow>& table);

/// "a,b,c" or "(a,b,c)*k"; the second form scales every entry by k.
std::vector<double> parse_grid(const std::string& text);

}  // namespace sflr
