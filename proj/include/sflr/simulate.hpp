#pragma once

#include "sflr/bspline.hpp"
#include "sflr/dataset.hpp"
#include "sflr/interval.hpp"
#include "sflr/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sflr {

enum class Scenario { OneNull, ThreeNull, Spectra };

/// "one-null", "three-null", "spectra" (underscores also accepted).
Scenario parse_scenario(const std::string& name);
std::string to_string(Scenario s);

struct ScenarioSpec {
  Scenario scenario = Scenario::OneNull;
  int n_train = 1000;
  int n_test = 1000;
  int grid_size = 101;                ///< equally spaced points on [0, 1]
  std::optional<double> alpha_true;   ///< unset: 0, or calibrated for spectra
  std::optional<double> snr;          ///< predictor signal-to-noise variance ratio
  std::uint64_t seed = 1;

  void validate() const;
};

/// 15(1-t) sin(2 pi (t+0.2)) on [0, 0.3], zero on (0.3, 0.7),
/// 15 t sin(2 pi (t-0.2)) on [0.7, 1].
double beta_one_null(double t);

/// Zero on [0, 0.05), (0.3, 0.7) and (0.95, 1]; 180(t-0.5) sin(4 pi (t+0.7))
/// on [0.05, 0.3] and 45 t sin(4 pi (t+0.3)) on [0.7, 0.95].
double beta_three_null(double t);

/// Two smooth bumps over the regions where the synthetic mean spectra differ.
double beta_spectra(double t);

std::function<double(double)> true_beta(Scenario s);
std::vector<Interval> true_null_regions(Scenario s);

/// The two synthetic mean spectra on `grid` (each a sum of six Gaussian peaks).
std::pair<Eigen::VectorXd, Eigen::VectorXd> spectra_means(const std::vector<double>& grid);

/// Degree-4 (order 5) clamped basis with 70 intervals on [0, 1]: 74 functions.
BSplineBasis predictor_basis();

/// X = B e(t) on the grid for a given coefficient matrix B (N x 74).
FunctionalDataset predictors_from_coefficients(const Eigen::MatrixXd& coefficients,
                                               const std::vector<double>& grid);

/// Unlabeled predictors for the scenario. Spline scenarios draw standard
/// normal coefficients; the spectra scenario adds unit normal noise to the
/// two mean spectra, splitting the samples evenly (first mean gets any extra).
FunctionalDataset generate_predictors(const ScenarioSpec& spec, int n_samples, Rng& rng);

/// Adds iid normal noise with sd = (pooled sd of all values) / sqrt(snr).
void add_predictor_noise(FunctionalDataset& data, double snr, Rng& rng);

struct SimulatedResponses {
  Eigen::VectorXd labels;
  Eigen::VectorXd probabilities;  ///< true p_i
};

/// Linear predictor alpha + int beta x_i, by the trapezoid rule on the grid.
Eigen::VectorXd linear_predictor(const FunctionalDataset& X, const std::function<double(double)>& beta,
                                 double alpha);

/// p_i = logistic(alpha + int beta x_i); y_i ~ Bernoulli(p_i).
SimulatedResponses generate_responses(const FunctionalDataset& X,
                                      const std::function<double(double)>& beta, double alpha,
                                      Rng& rng);

/// Intercept making the mean true probability 1/2 on X (bisection).
double calibrate_intercept(const FunctionalDataset& X, const std::function<double(double)>& beta);

struct SimulatedData {
  FunctionalDataset train;  ///< labeled
  FunctionalDataset test;   ///< labeled
  Eigen::VectorXd train_probabilities;
  Eigen::VectorXd test_probabilities;
  double alpha = 0.0;
};

/// Train and test sets from independent streams of spec.seed. Responses use
/// the noiseless curves; SNR noise (when set) is added afterwards, so a noisy
/// run shares its curves and labels with the noiseless run of the same seed.
SimulatedData simulate(const ScenarioSpec& spec);

}  // namespace sflr
