#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sflr/errors.hpp"
#include "sflr/experiment.hpp"
#include "sflr/simulate.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace sflr;

namespace {

constexpr double kPi = std::numbers::pi;

FunctionalDataset constant_curves(int N, double v) {
  FunctionalDataset d;
  d.grid = linspace(0.0, 1.0, 101);
  d.values = Eigen::MatrixXd::Constant(N, 101, v);
  return d;
}

}  // namespace

TEST_CASE("one-null beta values") {
  CHECK(beta_one_null(0.5) == 0.0);
  CHECK(beta_one_null(0.2) == doctest::Approx(15 * 0.8 * std::sin(0.8 * kPi)).epsilon(1e-14));
  CHECK(beta_one_null(0.2) == doctest::Approx(7.0534).epsilon(1e-4));
  CHECK(beta_one_null(1.0) == doctest::Approx(-14.2658).epsilon(1e-4));
  CHECK(beta_one_null(0.0) == doctest::Approx(15 * std::sin(0.4 * kPi)));
  CHECK_THROWS_AS(beta_one_null(1.2), InvalidArgument);
  CHECK_THROWS_AS(beta_one_null(-0.01), InvalidArgument);
}

TEST_CASE("three-null beta values") {
  CHECK(beta_three_null(0.02) == 0.0);
  // -72 sin(3.2 pi) = 72 sin(0.2 pi) and 36 sin(4.4 pi) = 36 sin(0.4 pi).
  CHECK(beta_three_null(0.1) == doctest::Approx(72 * std::sin(0.2 * kPi)).epsilon(1e-14));
  CHECK(beta_three_null(0.1) == doctest::Approx(42.3205).epsilon(1e-5));
  CHECK(beta_three_null(0.8) == doctest::Approx(36 * std::sin(0.4 * kPi)).epsilon(1e-14));
  CHECK(beta_three_null(0.8) == doctest::Approx(34.2380).epsilon(1e-5));
  CHECK(beta_three_null(0.97) == 0.0);
  CHECK_THROWS_AS(beta_three_null(2.0), InvalidArgument);
}

TEST_CASE("betas vanish on their null regions") {
  for (Scenario s : {Scenario::OneNull, Scenario::ThreeNull, Scenario::Spectra}) {
    const auto beta = true_beta(s);
    const auto regions = true_null_regions(s);
    REQUIRE_FALSE(regions.empty());
    int checked = 0;
    for (int i = 0; i <= 10000; ++i) {
      const double t = i / 10000.0;
      bool inside = false;
      for (const auto& iv : regions) inside = inside || (t > iv.start && t < iv.end);
      if (inside) {
        ++checked;
        CHECK(beta(t) == 0.0);
      }
    }
    CHECK(checked > 1000);
  }
  CHECK(parse_scenario("one-null") == Scenario::OneNull);
  CHECK(parse_scenario("three_null") == Scenario::ThreeNull);
  CHECK(parse_scenario("spectra") == Scenario::Spectra);
  CHECK(to_string(Scenario::ThreeNull) == "three-null");
  CHECK_THROWS_AS(parse_scenario("four-null"), InvalidArgument);
}

TEST_CASE("spec validation") {
  ScenarioSpec s;
  CHECK_NOTHROW(s.validate());
  s.n_train = 0;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.n_train = 10;
  s.snr = 0.0;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.snr = 1.0;
  s.grid_size = 1;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
}

TEST_CASE("predictor basis and linearity") {
  auto B = predictor_basis();
  CHECK(B.basis_count() == 74);
  CHECK(B.degree() == 4);
  CHECK(B.interval_count() == 70);
  auto grid = linspace(0.0, 1.0, 101);
  auto zero = predictors_from_coefficients(Eigen::MatrixXd::Zero(3, 74), grid);
  CHECK(zero.values.cwiseAbs().maxCoeff() == 0.0);
  auto ones = predictors_from_coefficients(Eigen::MatrixXd::Ones(2, 74), grid);
  CHECK((ones.values.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("generate_predictors is reproducible by seed") {
  ScenarioSpec spec;
  for (Scenario s : {Scenario::OneNull, Scenario::Spectra}) {
    spec.scenario = s;
    Rng a = make_rng(5, 1), b = make_rng(5, 1), c = make_rng(6, 1);
    auto x = generate_predictors(spec, 30, a);
    auto y = generate_predictors(spec, 30, b);
    auto z = generate_predictors(spec, 30, c);
    CHECK(x.values == y.values);
    CHECK(x.values != z.values);
    CHECK(x.sample_count() == 30);
    CHECK(x.point_count() == 101);
  }
}

TEST_CASE("X(0.5) moments match theory") {
  ScenarioSpec spec;
  Rng rng = make_rng(11, 0);
  const int N = 20000;
  auto X = generate_predictors(spec, N, rng);
  const Eigen::VectorXd col = X.values.col(50);
  const double mean = col.mean();
  const double var = (col.array() - mean).square().sum() / (N - 1);
  const double theory = predictor_basis().eval(0.5).squaredNorm();
  CHECK(std::abs(mean) < 3 * std::sqrt(theory / N));
  // sd of the sample variance of a normal is var sqrt(2/(N-1)).
  CHECK(std::abs(var - theory) < 3 * theory * std::sqrt(2.0 / (N - 1)));
}

TEST_CASE("snr=1 noise has the signal variance") {
  ScenarioSpec spec;
  Rng rng = make_rng(3, 0);
  auto X = generate_predictors(spec, 200, rng);
  auto noisy = X;
  Rng nr = make_rng(3, 9);
  add_predictor_noise(noisy, 1.0, nr);
  const Eigen::ArrayXXd signal = X.values.array();
  const Eigen::ArrayXXd added = (noisy.values - X.values).array();
  const double vs = (signal - signal.mean()).square().mean();
  const double vn = (added - added.mean()).square().mean();
  CHECK(vn / vs >= 0.8);
  CHECK(vn / vs <= 1.25);
  CHECK_THROWS_AS(add_predictor_noise(noisy, -1.0, nr), InvalidArgument);
}

TEST_CASE("responses: closed-form probabilities") {
  auto X = constant_curves(50, 1.0);
  Rng rng = make_rng(1, 0);
  auto zero = [](double) { return 0.0; };
  auto r0 = generate_responses(X, zero, 0.0, rng);
  CHECK((r0.probabilities.array() == 0.5).all());
  auto r3 = generate_responses(X, zero, 3.0, rng);
  for (Eigen::Index i = 0; i < 50; ++i) CHECK(r3.probabilities(i) == doctest::Approx(0.9526).epsilon(1e-4));
  for (Eigen::Index i = 0; i < 50; ++i) CHECK((r3.labels(i) == 0.0 || r3.labels(i) == 1.0));

  // int t * 2 dt over [0,1] = 1 by trapezoid (exact for linear).
  auto eta = linear_predictor(constant_curves(2, 2.0), [](double t) { return t; }, -0.5);
  CHECK(eta(0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("responses: class-1 fraction within binomial error") {
  ScenarioSpec spec;
  Rng rng = make_rng(8, 0);
  const int N = 10000;
  auto X = generate_predictors(spec, N, rng);
  Rng ry = make_rng(8, 1);
  auto r = generate_responses(X, beta_one_null, 0.3, ry);
  const double p = r.probabilities.mean();
  const double sd = std::sqrt((r.probabilities.array() * (1 - r.probabilities.array())).sum()) / N;
  CHECK(std::abs(r.labels.mean() - p) < 3 * sd);
}

TEST_CASE("spectra intercept calibration") {
  ScenarioSpec spec;
  spec.scenario = Scenario::Spectra;
  spec.n_train = 60;
  spec.n_test = 60;
  spec.seed = 4;
  auto sim = simulate(spec);
  CHECK(std::abs(sim.train_probabilities.mean() - 0.5) < 0.05);
  auto [a, b] = spectra_means(linspace(0.0, 1.0, 101));
  CHECK((a - b).cwiseAbs().maxCoeff() > 0.5);
}

TEST_CASE("simulate: shapes, determinism, and noise after responses") {
  ScenarioSpec spec;
  spec.n_train = 40;
  spec.n_test = 30;
  spec.seed = 12;
  auto a = simulate(spec);
  auto b = simulate(spec);
  CHECK(a.train.values == b.train.values);
  CHECK(*a.test.labels == *b.test.labels);
  CHECK(a.train.sample_count() == 40);
  CHECK(a.test.sample_count() == 30);
  CHECK(a.test_probabilities.size() == 30);
  CHECK(a.train.values != a.test.values.topRows(30));

  spec.snr = 1.0;
  auto noisy = simulate(spec);
  CHECK(*noisy.train.labels == *a.train.labels);
  CHECK(noisy.train_probabilities == a.train_probabilities);
  CHECK(noisy.train.values != a.train.values);
}

TEST_CASE("experiment: single replicate medians and determinism") {
  ExperimentConfig cfg;
  cfg.spec.n_train = 150;
  cfg.spec.n_test = 200;
  cfg.spec.seed = 30;
  cfg.grid.lambdas = {8.5, 11.9};
  cfg.grid.gammas = {1.5e-5};
  cfg.n_replicates = 1;
  auto s = replicate_experiment(cfg);
  REQUIRE(s.replicates.size() == 1u);
  const auto& r = s.replicates[0];
  REQUIRE(r.ok);
  CHECK(r.seed == 30u);
  CHECK(*s.mcr == *r.metrics.classification.mcr);
  CHECK(*s.ise0 == *r.metrics.ise0);
  CHECK(*s.pmse == *r.metrics.pmse);
  CHECK(s.failed == 0);

  cfg.n_replicates = 3;
  auto x = replicate_experiment(cfg);
  auto y = replicate_experiment(cfg);
  CHECK(replicate_table_csv(x) == replicate_table_csv(y));
  CHECK(x.replicates[0].metrics.classification.mcr == r.metrics.classification.mcr);
  CHECK(x.replicates[2].seed == 32u);

  std::istringstream table(replicate_table_csv(x));
  std::string header;
  std::getline(table, header);
  CHECK(header == "replicate,mcr,sensitivity,specificity,fdr,miss_rate,ise0,ise1,pmse,lambda,gamma,converged");
  CHECK(median_summary_csv(x).find("median") != std::string::npos);
}

TEST_CASE("experiment: degenerate replicate is recorded as failed") {
  ExperimentConfig cfg;
  cfg.spec.n_train = 2;
  cfg.spec.n_test = 5;
  cfg.spec.alpha_true = 40.0;  // every label is 1
  cfg.grid.lambdas = {8.5};
  cfg.grid.gammas = {1.5e-5};
  cfg.n_replicates = 2;
  ExperimentSummary s;
  CHECK_NOTHROW(s = replicate_experiment(cfg));
  CHECK(s.failed == 2);
  CHECK_FALSE(s.replicates[0].ok);
  CHECK_FALSE(s.replicates[0].error.empty());
  CHECK_FALSE(s.mcr.has_value());
}

TEST_CASE("median helper") {
  CHECK_FALSE(median({}).has_value());
  CHECK(*median({3.0}) == 3.0);
  CHECK(*median({4.0, 1.0, 3.0}) == 3.0);
  CHECK(*median({4.0, 1.0, 3.0, 2.0}) == 2.5);
}
