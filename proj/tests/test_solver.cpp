#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sflr/design.hpp"
#include "sflr/errors.hpp"
#include "sflr/simulate.hpp"
#include "sflr/solver.hpp"

#include <cmath>
#include <random>

using namespace sflr;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Textbook IRLS for unpenalized logistic regression on features X.
Eigen::VectorXd irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int iters = 100) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd p = eta.unaryExpr(&sigmoid);
    Eigen::VectorXd w = p.array() * (1.0 - p.array());
    Eigen::VectorXd z = eta.array() + (y - p).array() / w.array();
    Eigen::MatrixXd XtWX = X.transpose() * w.asDiagonal() * X;
    Eigen::VectorXd next = XtWX.ldlt().solve(X.transpose() * w.asDiagonal() * z);
    const double change = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    if (change < 1e-14) break;
  }
  return beta;
}

// -sum [y log p + (1-y) log(1-p)] + theta' P theta, unclamped.
double smooth_obj(const Eigen::VectorXd& th, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const Eigen::MatrixXd& P) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double p = sigmoid(X.row(i).dot(th));
    s -= y(i) * std::log(p) + (1 - y(i)) * std::log(1 - p);
  }
  return s + th.dot(P * th);
}

Eigen::VectorXd smooth_grad(const Eigen::VectorXd& th, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& y, const Eigen::MatrixXd& P) {
  Eigen::VectorXd p = (X * th).unaryExpr(&sigmoid);
  return -X.transpose() * (y - p) + 2.0 * P * th;
}

// Generic BFGS with Armijo backtracking.
Eigen::VectorXd bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                     const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g,
                     Eigen::VectorXd x) {
  const auto n = x.size();
  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd gx = g(x);
  for (int it = 0; it < 5000 && gx.norm() > 1e-11; ++it) {
    Eigen::VectorXd dir = -Hinv * gx;
    if (dir.dot(gx) >= 0) {
      Hinv.setIdentity();
      dir = -gx;
    }
    double step = 1.0;
    const double fx = f(x);
    while (f(x + step * dir) > fx + 1e-4 * step * dir.dot(gx) && step > 1e-16) step *= 0.5;
    Eigen::VectorXd s = step * dir;
    Eigen::VectorXd xn = x + s;
    Eigen::VectorXd gn = g(xn);
    Eigen::VectorXd yv = gn - gx;
    const double sy = s.dot(yv);
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      Hinv = (I - rho * s * yv.transpose()) * Hinv * (I - rho * yv * s.transpose()) +
             rho * s * s.transpose();
    }
    x = xn;
    gx = gn;
  }
  return x;
}

struct Problem {
  BSplineBasis basis;
  DesignMatrices design;
  Eigen::VectorXd y;
};

Problem one_null_problem(int n, std::uint64_t seed, int M = 30) {
  ScenarioSpec spec;
  spec.n_train = n;
  spec.n_test = 2;
  spec.seed = seed;
  auto sim = simulate(spec);
  BSplineBasis basis(1.0, 3, M);
  auto design = build_design(sim.train, basis, 2);
  return {basis, design, *sim.train.labels};
}

Eigen::MatrixXd random_matrix(int r, int c, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> N(0.0, sd);
  Eigen::MatrixXd A(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) A(i, j) = N(rng);
  return A;
}

Eigen::VectorXd bernoulli(const Eigen::VectorXd& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Eigen::VectorXd y(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) y(i) = U(rng) < p(i) ? 1.0 : 0.0;
  return y;
}

}  // namespace

TEST_CASE("log_likelihood examples") {
  std::mt19937_64 rng(1);
  Eigen::MatrixXd U = random_matrix(7, 4, rng);
  Eigen::VectorXd y(7);
  y << 1, 0, 0, 1, 1, 0, 1;
  CHECK(log_likelihood(Eigen::VectorXd::Zero(4), 0.0, U, y, 1e-5) ==
        doctest::Approx(7 * std::log(0.5)).epsilon(1e-14));

  Eigen::MatrixXd U1(1, 1);
  U1 << 1.0;
  Eigen::VectorXd y1(1);
  y1 << 1.0;
  Eigen::VectorXd b1(1);
  b1 << 40.0;
  CHECK(log_likelihood(b1, 0.0, U1, y1, 1e-5) == doctest::Approx(std::log(1 - 1e-5)).epsilon(1e-14));
  y1 << 0.0;
  CHECK(log_likelihood(b1, 0.0, U1, y1, 1e-5) == doctest::Approx(std::log(1e-5)).epsilon(1e-12));

  // Direct-formula oracle.
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd Ur = random_matrix(12, 5, rng, 0.5);
    Eigen::VectorXd b = random_matrix(5, 1, rng);
    const double alpha = random_matrix(1, 1, rng)(0);
    Eigen::VectorXd yr = bernoulli(Eigen::VectorXd::Constant(12, 0.5), rng);
    double oracle = 0.0;
    for (int i = 0; i < 12; ++i) {
      const double eta = alpha + Ur.row(i).dot(b);
      oracle += yr(i) * eta - std::log(1.0 + std::exp(eta));
    }
    CHECK(log_likelihood(b, alpha, Ur, yr, 1e-5) == doctest::Approx(oracle).epsilon(1e-10));
  }

  // Overflow safety.
  b1 << 800.0;
  y1 << 1.0;
  CHECK(std::isfinite(log_likelihood(b1, 0.0, U1, y1, 1e-5)));
  CHECK_THROWS_AS(log_likelihood(Eigen::VectorXd::Zero(3), 0.0, U, y, 1e-5), InvalidArgument);
  CHECK_THROWS_AS(log_likelihood(Eigen::VectorXd::Zero(4), 0.0, U, Eigen::VectorXd::Zero(3), 1e-5),
                  InvalidArgument);
}

TEST_CASE("lqa_weight_matrix examples") {
  auto B = make_basis(1.0, 3, 30);
  auto W = compute_W_blocks(B);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(33);
  CHECK(lqa_weight_matrix(ones, W, 0.0, 1.0, 30, 1e-8).isZero(0.0));

  const double lambda = 3.0;
  Eigen::MatrixXd Wt = lqa_weight_matrix(ones, W, lambda, 1.0, 30, 1e-8);
  Eigen::MatrixXd expected = 0.5 * lambda * B.gram(0);
  CHECK((Wt - expected).norm() / expected.norm() < 1e-12);

  Eigen::MatrixXd W0 = lqa_weight_matrix(Eigen::VectorXd::Zero(33), W, lambda, 1.0, 30, 1e-8);
  Eigen::MatrixXd expected0 = (0.5 * lambda * std::sqrt(1.0 / 30) / 1e-8) * B.gram(0);
  CHECK(W0.allFinite());
  CHECK((W0 - expected0).norm() / expected0.norm() < 1e-12);

  std::mt19937_64 rng(4);
  Eigen::VectorXd b = random_matrix(33, 1, rng);
  Eigen::MatrixXd Wr = lqa_weight_matrix(b, W, lambda, 1.0, 30, 1e-8);
  CHECK((Wr - Wr.transpose()).norm() < 1e-12 * Wr.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Wr);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
}

TEST_CASE("newton_step with zero penalties equals one IRLS step") {
  std::mt19937_64 rng(2);
  const int N = 60;
  Eigen::MatrixXd U = random_matrix(N, 1, rng);
  Eigen::VectorXd y = bernoulli((0.3 + 1.2 * U.col(0).array()).unaryExpr(&sigmoid), rng);
  Eigen::MatrixXd X = augment_design(U);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(2, 2);
  Eigen::VectorXd theta(2);
  theta << 0.1, -0.2;
  // One IRLS update from theta.
  Eigen::VectorXd eta = X * theta;
  Eigen::VectorXd p = eta.unaryExpr(&sigmoid);
  Eigen::VectorXd w = p.array() * (1 - p.array());
  Eigen::VectorXd z = eta.array() + (y - p).array() / w.array();
  Eigen::VectorXd oracle = (X.transpose() * w.asDiagonal() * X).ldlt().solve(X.transpose() * w.asDiagonal() * z);
  auto step = newton_step(theta, X, y, Z, Z, 1e-5);
  CHECK((step.theta - oracle).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_FALSE(step.pseudo_solve);
  CHECK(step.rcond > 0.0);

  // Fixed point at the optimum.
  Eigen::VectorXd opt = irls(X, y);
  auto again = newton_step(opt, X, y, Z, Z, 1e-5);
  CHECK((again.theta - opt).cwiseAbs().maxCoeff() < 1e-10);

  CHECK_THROWS_AS(newton_step(Eigen::VectorXd::Zero(3), X, y, Z, Z, 1e-5), InvalidArgument);
}

TEST_CASE("surrogate gradient and Hessian match central finite differences") {
  std::mt19937_64 rng(7);
  auto prob = one_null_problem(120, 3, 10);
  const int L = prob.basis.basis_count();
  Eigen::MatrixXd Ua = augment_design(prob.design.U);
  Eigen::MatrixXd Vs = pad_penalty(1e-3 * prob.design.V);
  std::normal_distribution<double> N01;
  double worst_g = 0.0, worst_h = 0.0;
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd th(L + 1);
    for (auto& v : th) v = 0.3 * N01(rng);
    Eigen::VectorXd bcur(L);
    for (auto& v : bcur) v = N01(rng);
    Eigen::MatrixXd Ws = pad_penalty(lqa_weight_matrix(bcur, prob.design.W_blocks, 2.0, 1.0, 10, 1e-8));
    auto d = surrogate_objective(th, Ua, prob.y, Vs, Ws, 1e-5);
    auto value = [&](const Eigen::VectorXd& t) { return surrogate_objective(t, Ua, prob.y, Vs, Ws, 1e-5).value; };
    Eigen::VectorXd fd_g(L + 1);
    Eigen::MatrixXd fd_h(L + 1, L + 1);
    for (int i = 0; i <= L; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(th(i)));
      Eigen::VectorXd tp = th, tm = th;
      tp(i) += h;
      tm(i) -= h;
      fd_g(i) = (value(tp) - value(tm)) / (2 * h);
      fd_h.col(i) = (surrogate_objective(tp, Ua, prob.y, Vs, Ws, 1e-5).gradient -
                     surrogate_objective(tm, Ua, prob.y, Vs, Ws, 1e-5).gradient) / (2 * h);
    }
    worst_g = std::max(worst_g, (fd_g - d.gradient).norm() / std::max(1.0, d.gradient.norm()));
    worst_h = std::max(worst_h, (fd_h - d.hessian).norm() / std::max(1.0, d.hessian.norm()));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.hessian);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
  }
  CHECK(worst_g < 1e-5);
  CHECK(worst_h < 1e-5);
}

TEST_CASE("fit_initial examples") {
  SolverConfig cfg;
  cfg.gamma = 1e-3;
  SUBCASE("balanced labels with U = 0") {
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(10, 6);
    Eigen::VectorXd y(10);
    y << 0, 1, 0, 1, 0, 1, 0, 1, 0, 1;
    auto init = fit_initial(U, y, Eigen::MatrixXd::Identity(6, 6), cfg);
    CHECK(init.converged);
    CHECK(init.coef.alpha == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(init.coef.b.cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("all labels equal") {
    std::mt19937_64 rng(9);
    Eigen::MatrixXd U = random_matrix(20, 4, rng);
    auto init = fit_initial(U, Eigen::VectorXd::Ones(20), Eigen::MatrixXd::Identity(4, 4), cfg);
    CHECK_FALSE(init.converged);
    CHECK(init.iterations == cfg.max_iterations);
    CHECK(init.coef.alpha > 5.0);
  }
  SUBCASE("N=40, L=8 matches BFGS on the same objective") {
    std::mt19937_64 rng(10);
    const int N = 40, L = 8;
    Eigen::MatrixXd U = random_matrix(N, L, rng, 0.7);
    Eigen::VectorXd btrue = random_matrix(L, 1, rng);
    Eigen::VectorXd y = bernoulli((0.2 + (U * btrue).array()).matrix().unaryExpr(&sigmoid), rng);
    Eigen::MatrixXd A = random_matrix(L, L, rng);
    Eigen::MatrixXd Vs = 0.05 * A.transpose() * A;
    auto init = fit_initial(U, y, Vs, cfg);
    REQUIRE(init.converged);
    Eigen::MatrixXd X = augment_design(U);
    Eigen::MatrixXd P = pad_penalty(Vs);
    Eigen::VectorXd ref = bfgs([&](const Eigen::VectorXd& t) { return smooth_obj(t, X, y, P); },
                               [&](const Eigen::VectorXd& t) { return smooth_grad(t, X, y, P); },
                               Eigen::VectorXd::Zero(L + 1));
    CHECK((init.coef.stacked() - ref).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("fit with no penalty equals the IRLS maximum likelihood estimate") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto prob = one_null_problem(200, seed, 2);
    REQUIRE(prob.basis.basis_count() == 5);
    SolverConfig cfg;
    auto r = fit(prob.design.U, prob.y, prob.basis, prob.design, cfg);
    CHECK(r.converged);
    Eigen::VectorXd oracle = irls(augment_design(prob.design.U), prob.y);
    CHECK((r.coefficients().stacked() - oracle).cwiseAbs().maxCoeff() < 1e-6);
  }
  // L <= N/10 with a finer basis.
  auto prob = one_null_problem(400, 4, 6);
  SolverConfig cfg;
  auto r = fit(prob.design.U, prob.y, prob.basis, prob.design, cfg);
  CHECK(r.converged);
  Eigen::VectorXd oracle = irls(augment_design(prob.design.U), prob.y);
  CHECK((r.coefficients().stacked() - oracle).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(r.df == doctest::Approx(prob.basis.basis_count() + 1).epsilon(1e-6));
}

TEST_CASE("huge lambda gives the intercept-only model") {
  auto prob = one_null_problem(300, 5);
  SolverConfig cfg;
  cfg.lambda = 1e6;
  cfg.gamma = 1e-4;
  auto r = fit(prob.design.U, prob.y, prob.basis, prob.design, cfg);
  CHECK(r.b.cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::all_of(r.null_mask.begin(), r.null_mask.end(), [](bool v) { return v; }));
  const double ybar = prob.y.mean();
  CHECK(std::abs(r.alpha - std::log(ybar / (1 - ybar))) < 1e-4);
}

TEST_CASE("one-null data: estimate vanishes on most of the null region") {
  auto prob = one_null_problem(1000, 1000);
  SolverConfig cfg;
  cfg.lambda = 34.0;
  cfg.gamma = 1.5e-4;
  auto r = fit(prob.design.U, prob.y, prob.basis, prob.design, cfg);
  CHECK(r.converged);
  // Subintervals 9..20 cover [0.3, 0.7].
  int null_count = 0;
  for (int j = 9; j < 21; ++j) null_count += r.null_mask[j] ? 1 : 0;
  CHECK(null_count >= 7);
  // Signal regions stay active.
  CHECK_FALSE(r.null_mask[0]);
  CHECK_FALSE(r.null_mask[29]);
}

TEST_CASE("fit invariants on seeded one-null fits") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    auto prob = one_null_problem(400, seed);
    SolverConfig cfg;
    cfg.lambda = 17.0;
    cfg.gamma = 1.5e-5;
    auto r = fit(prob.design.U, prob.y, prob.basis, prob.design, cfg);
    CAPTURE(seed);
    CHECK(r.converged);
    CHECK(r.status == "converged");
    CHECK(r.iterations <= cfg.max_iterations);
    // Objective descent across accepted iterates.
    for (std::size_t k = 1; k < r.objective_trace.size(); ++k)
      CHECK(r.objective_trace[k] <= r.objective_trace[k - 1] + 1e-12);
    // Null subintervals zero every touching coefficient.
    for (int j = 0; j < 30; ++j)
      if (r.null_mask[j]) CHECK(r.b.segment(j, 4).cwiseAbs().maxCoeff() == 0.0);
    // Thresholded entries.
    for (Eigen::Index l = 0; l < r.b.size(); ++l)
      CHECK((r.b(l) == 0.0 || std::abs(r.b(l)) >= cfg.coef_threshold_epsilon));
    // Idempotence: a warm restart from the result barely moves.
    auto again = fit(prob.design.U, prob.y, prob.basis, prob.design, cfg, r.coefficients());
    CHECK((again.b - r.b).cwiseAbs().maxCoeff() < cfg.tolerance);
    // final_objective is the exact objective at the returned estimate.
    const double f = penalized_objective(r.coefficients(), prob.design.U, prob.y, prob.design.V,
                                         prob.basis, cfg.lambda, cfg.gamma, cfg.prob_clamp_delta);
    CHECK(r.final_objective == doctest::Approx(f).epsilon(1e-14));
    CHECK(r.df > 0.0);
    CHECK(r.df < prob.basis.basis_count() + 1.0);
  }
}

TEST_CASE("measured L1 norm shrinks as lambda grows") {
  auto prob = one_null_problem(600, 21);
  double previous = std::numeric_limits<double>::infinity();
  for (double lambda : {0.0, 4.0, 8.0, 17.0, 34.0, 68.0}) {
    SolverConfig cfg;
    cfg.lambda = lambda;
    cfg.gamma = 1.5e-5;
    auto r = fit(prob.design.U, prob.y, prob.basis, prob.design, cfg);
    const double l1 = l1_norm(prob.basis, r.b);
    CAPTURE(lambda);
    CHECK(l1 <= previous * 1.05);
    previous = l1;
  }
}

TEST_CASE("l1_norm against a fine midpoint oracle") {
  auto B = make_basis(1.0, 3, 30);
  std::mt19937_64 rng(6);
  Eigen::VectorXd b = random_matrix(33, 1, rng);
  double oracle = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) oracle += std::abs(B.eval_spline(b, (i + 0.5) / n)) / n;
  // Sign changes inside a subinterval put kinks in |beta|.
  CHECK(l1_norm(B, b) == doctest::Approx(oracle).epsilon(1e-3));
  CHECK(l1_norm(B, Eigen::VectorXd::Ones(33)) == doctest::Approx(1.0).epsilon(1e-13));
  // Sign-definite beta: the rule is exact for the polynomial pieces.
  Eigen::VectorXd pos = b.cwiseAbs();
  double exact = 0.0;
  for (int i = 0; i < n; ++i) exact += B.eval_spline(pos, (i + 0.5) / n) / n;
  CHECK(l1_norm(B, pos) == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("solver config validation and degenerate labels") {
  SolverConfig cfg;
  cfg.lambda = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.lambda = 0.0;
  cfg.tolerance = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);

  auto prob = one_null_problem(50, 8, 5);
  SolverConfig ok;
  ok.gamma = 1e-3;
  auto r = fit(prob.design.U, Eigen::VectorXd::Zero(50), prob.basis, prob.design, ok);
  CHECK(r.degenerate_labels);
  CHECK_FALSE(r.converged);
  CHECK(r.status == "degenerate_labels");
}
