#include "sflr/cli.hpp"

#include "sflr/errors.hpp"
#include "sflr/experiment.hpp"
#include "sflr/io.hpp"
#include "sflr/metrics.hpp"
#include "sflr/model.hpp"
#include "sflr/simulate.hpp"
#include "sflr/tuning.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace sflr {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct NotConverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int resolve_intervals(const std::string& text, int n_points) {
  if (text == "auto") return default_interval_count(n_points);
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(text, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("--intervals must be 'auto' or a positive integer, got '" + text + "'");
  }
  if (used != text.size() || value < 1)
    throw InvalidArgument("--intervals must be 'auto' or a positive integer, got '" + text + "'");
  return value;
}

std::string header_comment(const std::string& command, const json& config) {
  return "sflr " + command + " " + config.dump();
}

std::string with_comments(const std::vector<std::string>& comments, const std::string& body) {
  std::string text;
  for (const auto& c : comments) text += "# " + c + "\n";
  return text + body;
}

std::string beta_curve_csv(const SflrModel& model, int points) {
  std::ostringstream os;
  os << "t,beta_hat,is_null\n";
  const auto& basis = model.basis();
  const auto mask = model.fit().null_mask;
  for (double t : linspace(0.0, basis.domain_end(), points)) {
    os << format_double(t) << ',' << format_double(model.beta_hat(t)) << ','
       << (mask[basis.interval_of(t)] ? 1 : 0) << '\n';
  }
  return os.str();
}

// Two-column CSV with a header; returns the second column keyed by the first.
std::vector<std::pair<double, double>> read_two_columns(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::pair<double, double>> rows;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected two columns");
    try {
      rows.emplace_back(parse_double(line.substr(0, comma)), parse_double(line.substr(comma + 1)));
    } catch (const InvalidArgument& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (rows.empty()) throw DataError(path.string() + ": no data rows");
  return rows;
}

// Piecewise-linear interpolation of a tabulated curve.
std::function<double(double)> tabulated_curve(std::vector<std::pair<double, double>> pts,
                                              const std::string& source) {
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (!(pts[i].first > pts[i - 1].first))
      throw DataError(source + ": t values must be strictly increasing");
  if (pts.size() < 2) throw DataError(source + ": need at least two points");
  return [pts = std::move(pts)](double t) {
    if (t <= pts.front().first) return pts.front().second;
    if (t >= pts.back().first) return pts.back().second;
    auto it = std::upper_bound(pts.begin(), pts.end(), t,
                               [](double v, const auto& p) { return v < p.first; });
    const auto& [t1, v1] = *it;
    const auto& [t0, v0] = *(it - 1);
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
  };
}

std::vector<Interval> parse_regions(const std::string& text) {
  std::vector<Interval> regions;
  if (text.empty()) return regions;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos)
      throw InvalidArgument("null region '" + item + "' must look like start:end");
    regions.push_back({parse_double(item.substr(0, colon)), parse_double(item.substr(colon + 1))});
  }
  return regions;
}

json solver_json(const SolverConfig& c) {
  return {{"m", c.m},
          {"prob_clamp_delta", c.prob_clamp_delta},
          {"coef_threshold_epsilon", c.coef_threshold_epsilon},
          {"max_iterations", c.max_iterations},
          {"tolerance", c.tolerance}};
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------------------

struct FitOptions {
  std::string data, out = "model.json", curve, intervals = "auto";
  double lambda = 0.0, gamma = 0.0;
  int degree = 3, m = 2, curve_points = 201, max_iterations = 100;
  double tolerance = 1e-6;
};

int run_fit(const FitOptions& o, std::ostream& out) {
  SolverConfig config;
  config.lambda = o.lambda;
  config.gamma = o.gamma;
  config.m = o.m;
  config.max_iterations = o.max_iterations;
  config.tolerance = o.tolerance;
  config.validate();
  auto data = read_dataset(o.data);
  if (!data.has_labels()) throw DataError(o.data + ": fit needs labels");
  int M = resolve_intervals(o.intervals, static_cast<int>(data.point_count()));
  BSplineBasis basis(data.grid.back(), o.degree, M);
  if (data.grid.front() < 0.0) throw DataError(o.data + ": grid must start at t >= 0");
  auto model = fit_model(data, basis, config);

  auto doc = json::parse(model.to_json());
  doc["config"] = {{"command", "fit"}, {"data", o.data}, {"seed", nullptr},
                   {"degree", o.degree}, {"intervals", M}, {"solver", solver_json(config)}};
  write_text(o.out, doc.dump(2) + "\n");
  std::string curve = o.curve.empty() ? fs::path(o.out).replace_extension("").string() + "_beta.csv"
                                      : o.curve;
  json curve_cfg = {{"model", o.out}, {"lambda", o.lambda}, {"gamma", o.gamma}, {"seed", nullptr}};
  write_text(curve, with_comments({header_comment("fit", curve_cfg)},
                                  beta_curve_csv(model, o.curve_points)));

  const auto& f = model.fit();
  json summary = {{"status", f.status},       {"converged", f.converged},
                  {"iterations", f.iterations}, {"df", f.df},
                  {"loglik", f.loglik},       {"null_regions", json::array()}};
  for (const auto& r : model.null_regions()) summary["null_regions"].push_back({r.start, r.end});
  out << summary.dump() << "\n";
  if (!f.converged) throw NotConverged("fit did not converge (" + f.status + ")");
  return kExitOk;
}

struct PredictOptions {
  std::string model, data, out = "predictions.csv";
  double threshold = 0.5;
};

int run_predict(const PredictOptions& o, std::ostream& out) {
  if (!(o.threshold > 0.0 && o.threshold < 1.0))
    throw InvalidArgument("--threshold must lie in (0, 1)");
  SflrModel model = SflrModel::from_json(read_text(o.model));
  auto data = read_dataset(o.data);
  auto p = model.predict_proba(data);
  auto cls = classify(p, o.threshold);
  std::ostringstream os;
  os << "sample,probability,class\n";
  for (Eigen::Index i = 0; i < p.size(); ++i)
    os << i << ',' << format_double(p(i)) << ',' << static_cast<int>(cls(i)) << '\n';
  json cfg = {{"model", o.model}, {"data", o.data}, {"threshold", o.threshold}, {"seed", nullptr}};
  write_text(o.out, with_comments({header_comment("predict", cfg)}, os.str()));
  out << "wrote " << p.size() << " predictions to " << o.out << "\n";
  return kExitOk;
}

// Default grids: the one-null grid, and a finer one for three null regions.
constexpr const char* kLambdaGrid = "(0.4,0.5,0.6,0.7)*17";
constexpr const char* kGammaGrid = "(1e-5,1e-6)*15";
constexpr const char* kThreeNullLambdaGrid = "(0.6,0.7,0.8,0.9,0.95,1)*17";
constexpr const char* kThreeNullGammaGrid = "(1e-5,1e-6,1e-7,5e-8)*15";

struct TuneOptions {
  std::string data, lambda_grid = kLambdaGrid, gamma_grid = kGammaGrid, criterion = "bic",
                    cv_loss = "deviance", out = "scores.csv", intervals = "auto";
  int folds = 5, degree = 3, m = 2;
  std::uint64_t seed = 1;
};

int run_tune(const TuneOptions& o, std::ostream& out) {
  TuningGrid grid;
  grid.lambdas = parse_grid(o.lambda_grid);
  grid.gammas = parse_grid(o.gamma_grid);
  grid.criterion = parse_criterion(o.criterion);
  grid.folds = o.folds;
  grid.seed = o.seed;
  if (o.cv_loss == "deviance")
    grid.cv_loss = CvLoss::Deviance;
  else if (o.cv_loss == "mcr")
    grid.cv_loss = CvLoss::MCR;
  else
    throw InvalidArgument("--cv-loss must be deviance or mcr");
  SolverConfig config;
  config.m = o.m;

  auto data = read_dataset(o.data);
  if (!data.has_labels()) throw DataError(o.data + ": tune needs labels");
  grid.validate(data.sample_count());
  int M = resolve_intervals(o.intervals, static_cast<int>(data.point_count()));
  BSplineBasis basis(data.grid.back(), o.degree, M);
  auto result = tune(data, basis, grid, config);

  json cfg = {{"data", o.data},          {"criterion", to_string(grid.criterion)},
              {"folds", o.folds},        {"cv_loss", o.cv_loss},
              {"seed", o.seed},          {"degree", o.degree},
              {"intervals", M},          {"lambda_grid", grid.lambdas},
              {"gamma_grid", grid.gammas}, {"solver", solver_json(config)}};
  write_text(o.out, with_comments({header_comment("tune", cfg)}, score_table_csv(result.table)));
  json best = {{"lambda", result.lambda}, {"gamma", result.gamma}, {"score", result.score},
               {"criterion", to_string(grid.criterion)}, {"seed", o.seed}};
  out << best.dump() << "\n";
  if (!std::isfinite(result.score)) throw NotConverged("no grid point converged");
  return kExitOk;
}

struct SimulateOptions {
  std::string scenario, out_dir = ".";
  int n_train = 1000, n_test = 1000, grid_size = 101, beta_points = 1001;
  std::uint64_t seed = 1;
  std::optional<double> snr, alpha;
};

int run_simulate(const SimulateOptions& o, std::ostream& out) {
  ScenarioSpec spec;
  spec.scenario = parse_scenario(o.scenario);
  spec.n_train = o.n_train;
  spec.n_test = o.n_test;
  spec.grid_size = o.grid_size;
  spec.seed = o.seed;
  spec.snr = o.snr;
  spec.alpha_true = o.alpha;
  spec.validate();
  auto sim = simulate(spec);

  json cfg = {{"scenario", to_string(spec.scenario)}, {"n_train", spec.n_train},
              {"n_test", spec.n_test}, {"grid_size", spec.grid_size}, {"seed", spec.seed},
              {"snr", opt_json(spec.snr)}, {"alpha", sim.alpha}};
  std::vector<std::string> comments{header_comment("simulate", cfg)};
  fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

  write_dataset(dir / "train.csv", sim.train, comments);
  write_dataset(dir / "test.csv", sim.test, comments);
  auto prob_csv = [](const Eigen::VectorXd& p) {
    std::ostringstream os;
    os << "sample,probability\n";
    for (Eigen::Index i = 0; i < p.size(); ++i) os << i << ',' << format_double(p(i)) << '\n';
    return os.str();
  };
  write_text(dir / "train_prob.csv", with_comments(comments, prob_csv(sim.train_probabilities)));
  write_text(dir / "test_prob.csv", with_comments(comments, prob_csv(sim.test_probabilities)));
  auto beta = true_beta(spec.scenario);
  std::ostringstream bs;
  bs << "t,beta\n";
  for (double t : linspace(0.0, 1.0, o.beta_points))
    bs << format_double(t) << ',' << format_double(beta(t)) << '\n';
  auto regions = true_null_regions(spec.scenario);
  std::string region_text;
  for (const auto& r : regions)
    region_text += (region_text.empty() ? "" : ",") + format_double(r.start) + ":" +
                   format_double(r.end);
  auto beta_comments = comments;
  beta_comments.push_back("null_regions " + region_text);
  write_text(dir / "true_beta.csv", with_comments(beta_comments, bs.str()));
  out << cfg.dump() << "\n";
  return kExitOk;
}

struct EvaluateOptions {
  std::string model, test, true_beta, null_regions, true_prob, out;
  double threshold = 0.5;
  int ise_points = 2001;
};

int run_evaluate(const EvaluateOptions& o, std::ostream& out) {
  if (!(o.threshold > 0.0 && o.threshold < 1.0))
    throw InvalidArgument("--threshold must lie in (0, 1)");
  if (o.ise_points < 3 || o.ise_points % 2 == 0)
    throw InvalidArgument("--ise-points must be odd and at least 3");
  SflrModel model = SflrModel::from_json(read_text(o.model));
  auto test = read_dataset(o.test);
  if (!test.has_labels()) throw DataError(o.test + ": evaluate needs labels");

  // Parse every argument before doing the work.
  std::optional<std::function<double(double)>> beta;
  std::vector<Interval> regions = parse_regions(o.null_regions);
  bool regions_given = !o.null_regions.empty();
  if (!o.true_beta.empty()) {
    bool is_scenario = true;
    Scenario sc{};
    try {
      sc = parse_scenario(o.true_beta);
    } catch (const InvalidArgument&) {
      is_scenario = false;
    }
    if (is_scenario) {
      beta = true_beta(sc);
      if (!regions_given) regions = true_null_regions(sc);
      regions_given = true;
    } else {
      beta = tabulated_curve(read_two_columns(o.true_beta), o.true_beta);
    }
  }
  if (beta && !regions_given)
    throw InvalidArgument("--true-beta from a CSV needs --null-regions");

  MetricsReport report;
  auto p = model.predict_proba(test);
  report.classification = classification_metrics(*test.labels, classify(p, o.threshold));
  if (!o.true_prob.empty()) {
    auto rows = read_two_columns(o.true_prob);
    if (static_cast<Eigen::Index>(rows.size()) != p.size())
      throw DataError(o.true_prob + ": " + std::to_string(rows.size()) +
                      " probabilities for " + std::to_string(p.size()) + " test curves");
    Eigen::VectorXd pt(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) pt(i) = rows[i].second;
    report.pmse = pmse(pt, p);
  }
  if (beta) {
    auto r = ise([&](double t) { return model.beta_hat(t); }, *beta,
                 normalize_intervals(regions, model.basis().domain_end()),
                 model.basis().domain_end(), o.ise_points);
    report.ise0 = r.ise0;
    report.ise1 = r.ise1;
  }

  auto doc = json::parse(metrics_to_json(report));
  doc["config"] = {{"model", o.model}, {"test", o.test}, {"true_beta", o.true_beta},
                   {"null_regions", o.null_regions}, {"true_prob", o.true_prob},
                   {"threshold", o.threshold}, {"seed", nullptr}};
  std::string text = doc.dump(2) + "\n";
  if (o.out.empty())
    out << text;
  else
    write_text(o.out, text);
  return kExitOk;
}

struct ReplicateOptions {
  std::string scenario, lambda_grid, gamma_grid, criterion = "bic", out_dir = ".";
  int n_train = 1000, n_test = 1000, grid_size = 101, replicates = 10, degree = 3, folds = 5;
  std::uint64_t seed = 1;
  std::optional<double> snr, fix_lambda, fix_gamma;
  std::optional<int> intervals;
};

int run_replicate_cmd(const ReplicateOptions& o, std::ostream& out) {
  ExperimentConfig cfg;
  cfg.spec.scenario = parse_scenario(o.scenario);
  cfg.spec.n_train = o.n_train;
  cfg.spec.n_test = o.n_test;
  cfg.spec.grid_size = o.grid_size;
  cfg.spec.seed = o.seed;
  cfg.spec.snr = o.snr;
  cfg.spec.validate();
  const bool three = cfg.spec.scenario == Scenario::ThreeNull;
  cfg.grid.lambdas = parse_grid(!o.lambda_grid.empty() ? o.lambda_grid
                                : three                ? kThreeNullLambdaGrid
                                                       : kLambdaGrid);
  cfg.grid.gammas = parse_grid(!o.gamma_grid.empty() ? o.gamma_grid
                               : three               ? kThreeNullGammaGrid
                                                     : kGammaGrid);
  cfg.grid.criterion = parse_criterion(o.criterion);
  cfg.grid.folds = o.folds;
  cfg.grid.validate(cfg.spec.n_train);
  cfg.n_replicates = o.replicates;
  cfg.degree = o.degree;
  cfg.intervals = o.intervals;
  if (o.replicates < 1) throw InvalidArgument("--replicates must be positive");
  if (o.fix_lambda.has_value() != o.fix_gamma.has_value()) {
    throw InvalidArgument("--fix-lambda and --fix-gamma go together");
  }
  if (o.fix_lambda) cfg.fixed_tuning = std::pair{*o.fix_lambda, *o.fix_gamma};
  auto summary = replicate_experiment(cfg);

  json c = {{"scenario", to_string(cfg.spec.scenario)}, {"n_train", o.n_train},
            {"n_test", o.n_test}, {"grid_size", o.grid_size}, {"seed", o.seed},
            {"snr", opt_json(o.snr)}, {"replicates", o.replicates},
            {"criterion", to_string(cfg.grid.criterion)}, {"lambda_grid", cfg.grid.lambdas},
            {"gamma_grid", cfg.grid.gammas}, {"degree", o.degree},
            {"intervals", o.intervals ? json(*o.intervals) : json("auto")},
            {"fixed_lambda", opt_json(o.fix_lambda)}, {"fixed_gamma", opt_json(o.fix_gamma)}};
  std::vector<std::string> comments{header_comment("replicate", c)};
  fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "replicates.csv", with_comments(comments, replicate_table_csv(summary)));
  write_text(dir / "medians.csv", with_comments(comments, median_summary_csv(summary)));
  out << median_summary_csv(summary);
  for (const auto& r : summary.replicates)
    if (!r.ok) out << "# replicate " << r.replicate << " failed: " << r.error << "\n";
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse smooth functional logistic regression", "sflr"};
  app.require_subcommand(1);

  FitOptions fo;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model for one (lambda, gamma) pair");
  fit_cmd->add_option("--data", fo.data, "Labeled dataset CSV")->required();
  fit_cmd->add_option("--lambda", fo.lambda, "Sparsity weight (>= 0)")->required();
  fit_cmd->add_option("--gamma", fo.gamma, "Roughness weight (>= 0)")->required();
  fit_cmd->add_option("--degree", fo.degree, "Spline degree")->capture_default_str();
  fit_cmd->add_option("--m", fo.m, "Roughness derivative order")->capture_default_str();
  fit_cmd->add_option("--intervals", fo.intervals, "Subinterval count or 'auto'")
      ->capture_default_str();
  fit_cmd->add_option("--max-iterations", fo.max_iterations)->capture_default_str();
  fit_cmd->add_option("--tolerance", fo.tolerance)->capture_default_str();
  fit_cmd->add_option("--out", fo.out, "Model JSON")->capture_default_str();
  fit_cmd->add_option("--curve", fo.curve, "beta_hat curve CSV (default <out>_beta.csv)");
  fit_cmd->add_option("--curve-points", fo.curve_points)->capture_default_str()
      ->check(CLI::Range(2, 1000000));

  PredictOptions po;
  auto* predict_cmd = app.add_subcommand("predict", "Predict probabilities for new curves");
  predict_cmd->add_option("--model", po.model, "Model JSON")->required();
  predict_cmd->add_option("--data", po.data, "Dataset CSV (labels may be NA)")->required();
  predict_cmd->add_option("--out", po.out)->capture_default_str();
  predict_cmd->add_option("--threshold", po.threshold)->capture_default_str();

  TuneOptions to;
  auto* tune_cmd = app.add_subcommand("tune", "Select (lambda, gamma) over a grid");
  tune_cmd->add_option("--data", to.data, "Labeled dataset CSV")->required();
  tune_cmd->add_option("--lambda-grid", to.lambda_grid, "e.g. 1,2,4 or (0.4,0.5)*17")
      ->capture_default_str();
  tune_cmd->add_option("--gamma-grid", to.gamma_grid)->capture_default_str();
  tune_cmd->add_option("--criterion", to.criterion, "bic, aic or cv")->capture_default_str();
  tune_cmd->add_option("--cv-loss", to.cv_loss, "deviance or mcr")->capture_default_str();
  tune_cmd->add_option("--folds", to.folds)->capture_default_str();
  tune_cmd->add_option("--seed", to.seed, "CV fold seed")->capture_default_str();
  tune_cmd->add_option("--degree", to.degree)->capture_default_str();
  tune_cmd->add_option("--m", to.m)->capture_default_str();
  tune_cmd->add_option("--intervals", to.intervals)->capture_default_str();
  tune_cmd->add_option("--out", to.out, "Score table CSV")->capture_default_str();

  SimulateOptions so;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic train/test pair");
  sim_cmd->add_option("--scenario", so.scenario, "one-null, three-null or spectra")->required();
  sim_cmd->add_option("--n-train", so.n_train)->capture_default_str();
  sim_cmd->add_option("--n-test", so.n_test)->capture_default_str();
  sim_cmd->add_option("--grid-size", so.grid_size)->capture_default_str();
  sim_cmd->add_option("--seed", so.seed)->capture_default_str();
  sim_cmd->add_option("--snr", so.snr, "Predictor signal-to-noise ratio");
  sim_cmd->add_option("--alpha", so.alpha, "True intercept");
  sim_cmd->add_option("--beta-points", so.beta_points)->capture_default_str()
      ->check(CLI::Range(2, 1000000));
  sim_cmd->add_option("--out-dir", so.out_dir)->capture_default_str();

  EvaluateOptions eo;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a model on labeled test data");
  eval_cmd->add_option("--model", eo.model)->required();
  eval_cmd->add_option("--test", eo.test)->required();
  eval_cmd->add_option("--true-beta", eo.true_beta, "Scenario name or t,beta CSV");
  eval_cmd->add_option("--null-regions", eo.null_regions, "e.g. 0.3:0.7,0.95:1");
  eval_cmd->add_option("--true-prob", eo.true_prob, "sample,probability CSV");
  eval_cmd->add_option("--threshold", eo.threshold)->capture_default_str();
  eval_cmd->add_option("--ise-points", eo.ise_points)->capture_default_str();
  eval_cmd->add_option("--out", eo.out, "Metrics JSON (default stdout)");

  ReplicateOptions ro;
  auto* rep_cmd = app.add_subcommand("replicate", "Monte Carlo study of a scenario");
  rep_cmd->add_option("--scenario", ro.scenario)->required();
  rep_cmd->add_option("--lambda-grid", ro.lambda_grid, "Default depends on the scenario");
  rep_cmd->add_option("--gamma-grid", ro.gamma_grid);
  rep_cmd->add_option("--criterion", ro.criterion)->capture_default_str();
  rep_cmd->add_option("--folds", ro.folds)->capture_default_str();
  rep_cmd->add_option("--replicates", ro.replicates)->capture_default_str();
  rep_cmd->add_option("--n-train", ro.n_train)->capture_default_str();
  rep_cmd->add_option("--n-test", ro.n_test)->capture_default_str();
  rep_cmd->add_option("--grid-size", ro.grid_size)->capture_default_str();
  rep_cmd->add_option("--seed", ro.seed, "Base seed; replicate r uses seed + r")
      ->capture_default_str();
  rep_cmd->add_option("--snr", ro.snr);
  rep_cmd->add_option("--fix-lambda", ro.fix_lambda, "Skip tuning: use this lambda everywhere");
  rep_cmd->add_option("--fix-gamma", ro.fix_gamma, "Skip tuning: use this gamma everywhere");
  rep_cmd->add_option("--degree", ro.degree)->capture_default_str();
  rep_cmd->add_option("--intervals", ro.intervals);
  rep_cmd->add_option("--out-dir", ro.out_dir)->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fit_cmd) return run_fit(fo, out);
    if (*predict_cmd) return run_predict(po, out);
    if (*tune_cmd) return run_tune(to, out);
    if (*sim_cmd) return run_simulate(so, out);
    if (*eval_cmd) return run_evaluate(eo, out);
    if (*rep_cmd) return run_replicate_cmd(ro, out);
  } catch (const InvalidArgument& e) {
    err << "sflr: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "sflr: data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NotConverged& e) {
    err << "sflr: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const NumericalError& e) {
    err << "sflr: numerical failure: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "sflr: data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace sflr
