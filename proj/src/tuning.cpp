#include "sflr/tuning.hpp"

#include "sflr/errors.hpp"
#include "sflr/io.hpp"
#include "sflr/parallel.hpp"
#include "sflr/random.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace sflr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double validation_loss(const FitResult& fit, const Eigen::MatrixXd& U, const Eigen::VectorXd& y,
                       CvLoss loss, double clamp) {
  if (loss == CvLoss::Deviance) {
    return -2.0 * log_likelihood(fit.b, fit.alpha, U, y, clamp) / static_cast<double>(y.size());
  }
  const Eigen::VectorXd eta = (U * fit.b).array() + fit.alpha;
  long wrong = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double label = eta(i) >= 0.0 ? 1.0 : 0.0;
    if (label != y(i)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(y.size());
}

template <typename Rows>
Eigen::MatrixXd take_rows(const Eigen::MatrixXd& A, const Rows& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), A.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = A.row(idx[r]);
  return out;
}

template <typename Rows>
Eigen::VectorXd take(const Eigen::VectorXd& v, const Rows& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(idx[r]);
  return out;
}

}  // namespace

Criterion parse_criterion(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "bic") return Criterion::BIC;
  if (s == "aic") return Criterion::AIC;
  if (s == "cv") return Criterion::CV;
  throw InvalidArgument("unknown criterion '" + name + "' (expected bic, aic or cv)");
}

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::BIC: return "bic";
    case Criterion::AIC: return "aic";
    case Criterion::CV: return "cv";
  }
  return "unknown";
}

void TuningGrid::validate(Eigen::Index sample_count) const {
  if (lambdas.empty() || gammas.empty()) throw InvalidArgument("tuning grid must be nonempty");
  for (double v : lambdas) {
    if (!(v >= 0.0)) throw InvalidArgument("tuning grid: lambda values must be nonnegative");
  }
  for (double v : gammas) {
    if (!(v >= 0.0)) throw InvalidArgument("tuning grid: gamma values must be nonnegative");
  }
  if (criterion == Criterion::CV && (folds < 2 || folds > sample_count)) {
    throw InvalidArgument("tuning grid: folds must lie in [2, N]");
  }
}

double score_ic(const FitResult& fit, Eigen::Index N, Criterion criterion) {
  if (!fit.converged) throw InvalidArgument("score_ic: fit did not converge");
  switch (criterion) {
    case Criterion::BIC: return -2.0 * fit.loglik + std::log(static_cast<double>(N)) * fit.df;
    case Criterion::AIC: return -2.0 * fit.loglik + 2.0 * fit.df;
    case Criterion::CV: break;
  }
  throw InvalidArgument("score_ic: cross-validation is not an information criterion");
}

std::vector<int> stratified_folds(const Eigen::VectorXd& y, int folds, std::uint64_t seed) {
  if (folds < 2 || folds > y.size()) throw InvalidArgument("stratified_folds: folds must lie in [2, N]");
  std::vector<int> ones;
  std::vector<int> zeros;
  for (Eigen::Index i = 0; i < y.size(); ++i) (y(i) == 1.0 ? ones : zeros).push_back(static_cast<int>(i));
  Rng rng = make_rng(seed, 0xC5);
  std::shuffle(ones.begin(), ones.end(), rng);
  std::shuffle(zeros.begin(), zeros.end(), rng);
  std::vector<int> fold(static_cast<std::size_t>(y.size()));
  int next = 0;
  for (const auto* cls : {&ones, &zeros}) {
    for (int i : *cls) {
      fold[i] = next;
      next = (next + 1) % folds;
    }
  }
  return fold;
}

TuningResult tune(const Eigen::MatrixXd& U, const Eigen::VectorXd& y, const BSplineBasis& basis,
                  const DesignMatrices& design, const TuningGrid& grid, const SolverConfig& config,
                  bool parallel) {
  grid.validate(y.size());
  const double ones = y.sum();
  if (ones == 0.0 || ones == static_cast<double>(y.size())) {
    throw DataError("tune: both classes must be present");
  }
  const std::size_t n_lambda = grid.lambdas.size();
  const std::size_t n_points = n_lambda * grid.gammas.size();
  const bool cv = grid.criterion == Criterion::CV;
  const std::size_t n_folds = cv ? static_cast<std::size_t>(grid.folds) : 1;

  std::vector<std::vector<int>> train_rows(n_folds), valid_rows(n_folds);
  if (cv) {
    const std::vector<int> fold = stratified_folds(y, grid.folds, grid.seed);
    for (std::size_t i = 0; i < fold.size(); ++i) {
      for (std::size_t f = 0; f < n_folds; ++f) {
        (static_cast<std::size_t>(fold[i]) == f ? valid_rows[f] : train_rows[f])
            .push_back(static_cast<int>(i));
      }
    }
  }

  // One task per (grid point, fold); each writes only its own slot.
  std::vector<double> task_score(n_points * n_folds, kInf);
  std::vector<char> task_ok(n_points * n_folds, 0);
  auto run_task = [&](std::size_t task) {
    const std::size_t point = task / n_folds;
    const std::size_t f = task % n_folds;
    SolverConfig c = config;
    c.lambda = grid.lambdas[point / grid.gammas.size()];
    c.gamma = grid.gammas[point % grid.gammas.size()];
    try {
      if (!cv) {
        const FitResult r = fit(U, y, basis, design, c);
        if (r.converged && !r.degenerate_labels) {
          task_score[task] = score_ic(r, y.size(), grid.criterion);
          task_ok[task] = 1;
        }
        return;
      }
      const Eigen::VectorXd y_train = take(y, train_rows[f]);
      const FitResult r = fit(take_rows(U, train_rows[f]), y_train, basis, design, c);
      if (r.converged && !r.degenerate_labels) {
        task_score[task] = validation_loss(r, take_rows(U, valid_rows[f]), take(y, valid_rows[f]),
                                           grid.cv_loss, c.prob_clamp_delta);
        task_ok[task] = 1;
      }
    } catch (const NumericalError&) {
      // recorded as a failed grid point
    }
  };
  if (parallel) {
    parallel_for(task_score.size(), run_task);
  } else {
    for (std::size_t t = 0; t < task_score.size(); ++t) run_task(t);
  }

  TuningResult result;
  result.table.reserve(n_points);
  for (std::size_t point = 0; point < n_points; ++point) {
    ScoreRow row;
    row.lambda = grid.lambdas[point / grid.gammas.size()];
    row.gamma = grid.gammas[point % grid.gammas.size()];
    row.criterion = grid.criterion;
    row.converged = true;
    double total = 0.0;
    for (std::size_t f = 0; f < n_folds; ++f) {
      row.converged = row.converged && task_ok[point * n_folds + f];
      total += task_score[point * n_folds + f];
    }
    row.score = row.converged ? total / static_cast<double>(n_folds) : kInf;
    result.table.push_back(row);
  }

  const ScoreRow* best = &result.table.front();
  for (const ScoreRow& row : result.table) {
    const bool better = row.score < best->score ||
                        (row.score == best->score &&
                         (row.lambda > best->lambda ||
                          (row.lambda == best->lambda && row.gamma > best->gamma)));
    if (better) best = &row;
  }
  result.lambda = best->lambda;
  result.gamma = best->gamma;
  result.score = best->score;
  return result;
}

TuningResult tune(const FunctionalDataset& data, const BSplineBasis& basis, const TuningGrid& grid,
                  const SolverConfig& config, bool parallel) {
  data.validate();
  if (!data.labels) throw DataError("tune: dataset has no labels");
  const DesignMatrices design = build_design(data, basis, config.m);
  return tune(design.U, *data.labels, basis, design, grid, config, parallel);
}

std::string score_table_csv(const std::vector<ScoreRow>& table) {
  std::ostringstream out;
  out << "lambda,gamma,criterion,score,converged\n";
  for (const ScoreRow& r : table) {
    out << format_double(r.lambda) << ',' << format_double(r.gamma) << ',' << to_string(r.criterion)
        << ',' << format_double(r.score) << ',' << (r.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<double> parse_grid(const std::string& text) {
  std::string body = text;
  double scale = 1.0;
  body.erase(std::remove_if(body.begin(), body.end(), [](unsigned char c) { return std::isspace(c); }),
             body.end());
  if (!body.empty() && body.front() == '(') {
    const auto close = body.find(')');
    if (close == std::string::npos) throw InvalidArgument("grid '" + text + "': missing ')'");
    const std::string tail = body.substr(close + 1);
    body = body.substr(1, close - 1);
    if (!tail.empty()) {
      if (tail.front() != '*') throw InvalidArgument("grid '" + text + "': expected '*' after ')'");
      scale = parse_double(tail.substr(1));
    }
  }
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(scale * parse_double(item));
  if (out.empty()) throw InvalidArgument("grid '" + text + "' is empty");
  return out;
}

}  // namespace sflr
