#include "sflr/simulate.hpp"

#include "sflr/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace sflr {

namespace {

constexpr double kPi = std::numbers::pi;

struct Peak {
  double center;
  double width;
  double height;
};

// Mean spectra differ only in the second and fifth peaks.
constexpr std::array<Peak, 6> kMeanA{{{0.10, 0.020, 4.0},
                                      {0.25, 0.025, 6.0},
                                      {0.40, 0.020, 5.0},
                                      {0.55, 0.030, 7.0},
                                      {0.68, 0.025, 5.0},
                                      {0.85, 0.020, 4.0}}};
constexpr std::array<Peak, 6> kMeanB{{{0.10, 0.020, 4.0},
                                      {0.25, 0.025, 9.0},
                                      {0.40, 0.020, 5.0},
                                      {0.55, 0.030, 7.0},
                                      {0.68, 0.025, 2.5},
                                      {0.85, 0.020, 4.0}}};

constexpr Interval kSpectraBump1{0.17, 0.33};
constexpr Interval kSpectraBump2{0.60, 0.76};
constexpr double kSpectraAmplitude = 10.0;

// Stream ids within one seed.
constexpr std::uint64_t kTrainX = 1, kTrainY = 2, kTestX = 3, kTestY = 4, kTrainNoise = 5,
                        kTestNoise = 6;

void check_unit_domain(double t, const char* name) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidArgument(std::string(name) + ": t = " + std::to_string(t) + " outside [0, 1]");
  }
}

double peak_sum(const std::array<Peak, 6>& peaks, double t) {
  double v = 0.0;
  for (const Peak& p : peaks) {
    const double z = (t - p.center) / p.width;
    v += p.height * std::exp(-0.5 * z * z);
  }
  return v;
}

double bump(const Interval& iv, double t) {
  if (t <= iv.start || t >= iv.end) return 0.0;
  const double s = std::sin(kPi * (t - iv.start) / iv.length());
  return s * s;
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Scenario parse_scenario(const std::string& name) {
  std::string s = name;
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "one-null") return Scenario::OneNull;
  if (s == "three-null") return Scenario::ThreeNull;
  if (s == "spectra") return Scenario::Spectra;
  throw InvalidArgument("unknown scenario '" + name + "'");
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::OneNull: return "one-null";
    case Scenario::ThreeNull: return "three-null";
    case Scenario::Spectra: return "spectra";
  }
  return "unknown";
}

void ScenarioSpec::validate() const {
  if (n_train < 1 || n_test < 1) throw InvalidArgument("ScenarioSpec: sample sizes must be positive");
  if (grid_size < 2) throw InvalidArgument("ScenarioSpec: grid needs at least two points");
  if (snr && !(*snr > 0.0)) throw InvalidArgument("ScenarioSpec: snr must be positive");
}

double beta_one_null(double t) {
  check_unit_domain(t, "beta_one_null");
  if (t <= 0.3) return 15.0 * (1.0 - t) * std::sin(2.0 * kPi * (t + 0.2));
  if (t < 0.7) return 0.0;
  return 15.0 * t * std::sin(2.0 * kPi * (t - 0.2));
}

double beta_three_null(double t) {
  check_unit_domain(t, "beta_three_null");
  if (t < 0.05) return 0.0;
  if (t <= 0.3) return 180.0 * (t - 0.5) * std::sin(4.0 * kPi * (t + 0.7));
  if (t < 0.7) return 0.0;
  if (t <= 0.95) return 45.0 * t * std::sin(4.0 * kPi * (t + 0.3));
  return 0.0;
}

double beta_spectra(double t) {
  check_unit_domain(t, "beta_spectra");
  return kSpectraAmplitude * (bump(kSpectraBump1, t) - bump(kSpectraBump2, t));
}

std::function<double(double)> true_beta(Scenario s) {
  switch (s) {
    case Scenario::OneNull: return beta_one_null;
    case Scenario::ThreeNull: return beta_three_null;
    case Scenario::Spectra: return beta_spectra;
  }
  throw InvalidArgument("true_beta: unknown scenario");
}

std::vector<Interval> true_null_regions(Scenario s) {
  switch (s) {
    case Scenario::OneNull: return {{0.3, 0.7}};
    case Scenario::ThreeNull: return {{0.0, 0.05}, {0.3, 0.7}, {0.95, 1.0}};
    case Scenario::Spectra:
      return {{0.0, kSpectraBump1.start}, {kSpectraBump1.end, kSpectraBump2.start},
              {kSpectraBump2.end, 1.0}};
  }
  throw InvalidArgument("true_null_regions: unknown scenario");
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> spectra_means(const std::vector<double>& grid) {
  Eigen::VectorXd a(static_cast<Eigen::Index>(grid.size()));
  Eigen::VectorXd b(a.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    a(static_cast<Eigen::Index>(k)) = peak_sum(kMeanA, grid[k]);
    b(static_cast<Eigen::Index>(k)) = peak_sum(kMeanB, grid[k]);
  }
  return {a, b};
}

BSplineBasis predictor_basis() { return BSplineBasis(1.0, 4, 70); }

FunctionalDataset predictors_from_coefficients(const Eigen::MatrixXd& coefficients,
                                               const std::vector<double>& grid) {
  const BSplineBasis basis = predictor_basis();
  if (coefficients.cols() != basis.basis_count()) {
    throw InvalidArgument("predictors_from_coefficients: expected " +
                          std::to_string(basis.basis_count()) + " coefficient columns");
  }
  FunctionalDataset out;
  out.grid = grid;
  out.values = coefficients * basis.eval_matrix(grid).transpose();
  return out;
}

FunctionalDataset generate_predictors(const ScenarioSpec& spec, int n_samples, Rng& rng) {
  spec.validate();
  const std::vector<double> grid = linspace(0.0, 1.0, spec.grid_size);
  std::normal_distribution<double> normal(0.0, 1.0);
  if (spec.scenario == Scenario::Spectra) {
    const auto [mean_a, mean_b] = spectra_means(grid);
    FunctionalDataset out;
    out.grid = grid;
    out.values.resize(n_samples, spec.grid_size);
    const int first = (n_samples + 1) / 2;
    for (int i = 0; i < n_samples; ++i) {
      const Eigen::VectorXd& mean = i < first ? mean_a : mean_b;
      for (int k = 0; k < spec.grid_size; ++k) out.values(i, k) = mean(k) + normal(rng);
    }
    return out;
  }
  Eigen::MatrixXd coef(n_samples, predictor_basis().basis_count());
  for (Eigen::Index i = 0; i < coef.rows(); ++i) {
    for (Eigen::Index l = 0; l < coef.cols(); ++l) coef(i, l) = normal(rng);
  }
  return predictors_from_coefficients(coef, grid);
}

void add_predictor_noise(FunctionalDataset& data, double snr, Rng& rng) {
  if (!(snr > 0.0)) throw InvalidArgument("add_predictor_noise: snr must be positive");
  const double n = static_cast<double>(data.values.size());
  if (n < 2) return;
  const double mean = data.values.mean();
  const double var = (data.values.array() - mean).square().sum() / (n - 1.0);
  std::normal_distribution<double> noise(0.0, std::sqrt(var / snr));
  for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
    for (Eigen::Index k = 0; k < data.values.cols(); ++k) data.values(i, k) += noise(rng);
  }
}

Eigen::VectorXd linear_predictor(const FunctionalDataset& X, const std::function<double(double)>& beta,
                                 double alpha) {
  const Eigen::VectorXd w = trapezoid_weights(X.grid);
  Eigen::VectorXd wb(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) wb(k) = w(k) * beta(X.grid[k]);
  return (X.values * wb).array() + alpha;
}

SimulatedResponses generate_responses(const FunctionalDataset& X,
                                      const std::function<double(double)>& beta, double alpha,
                                      Rng& rng) {
  const Eigen::VectorXd eta = linear_predictor(X, beta, alpha);
  SimulatedResponses out;
  out.probabilities.resize(eta.size());
  out.labels.resize(eta.size());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    out.probabilities(i) = logistic(eta(i));
    out.labels(i) = unif(rng) < out.probabilities(i) ? 1.0 : 0.0;
  }
  return out;
}

double calibrate_intercept(const FunctionalDataset& X, const std::function<double(double)>& beta) {
  const Eigen::VectorXd eta = linear_predictor(X, beta, 0.0);
  auto mean_p = [&](double a) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) s += logistic(a + eta(i));
    return s / static_cast<double>(eta.size());
  };
  double lo = -eta.maxCoeff() - 50.0;
  double hi = -eta.minCoeff() + 50.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_p(mid) < 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SimulatedData simulate(const ScenarioSpec& spec) {
  spec.validate();
  const auto beta = true_beta(spec.scenario);
  SimulatedData out;

  Rng train_x = make_rng(spec.seed, kTrainX);
  Rng test_x = make_rng(spec.seed, kTestX);
  out.train = generate_predictors(spec, spec.n_train, train_x);
  out.test = generate_predictors(spec, spec.n_test, test_x);

  if (spec.alpha_true) {
    out.alpha = *spec.alpha_true;
  } else if (spec.scenario == Scenario::Spectra) {
    out.alpha = calibrate_intercept(out.train, beta);
  }

  Rng train_y = make_rng(spec.seed, kTrainY);
  Rng test_y = make_rng(spec.seed, kTestY);
  SimulatedResponses r_train = generate_responses(out.train, beta, out.alpha, train_y);
  SimulatedResponses r_test = generate_responses(out.test, beta, out.alpha, test_y);
  out.train.labels = std::move(r_train.labels);
  out.test.labels = std::move(r_test.labels);
  out.train_probabilities = std::move(r_train.probabilities);
  out.test_probabilities = std::move(r_test.probabilities);

  if (spec.snr) {
    Rng train_noise = make_rng(spec.seed, kTrainNoise);
    Rng test_noise = make_rng(spec.seed, kTestNoise);
    add_predictor_noise(out.train, *spec.snr, train_noise);
    add_predictor_noise(out.test, *spec.snr, test_noise);
  }
  return out;
}

}  // namespace sflr
