#include "sflr/experiment.hpp"

#include "sflr/design.hpp"
#include "sflr/errors.hpp"
#include "sflr/io.hpp"
#include "sflr/model.hpp"
#include "sflr/parallel.hpp"

#include <algorithm>
#include <sstream>

namespace sflr {

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

}  // namespace

std::optional<double> median(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ReplicateResult run_replicate(const ExperimentConfig& config, int replicate) {
  ReplicateResult out;
  out.replicate = replicate;
  out.seed = config.spec.seed + static_cast<std::uint64_t>(replicate);
  try {
    ScenarioSpec spec = config.spec;
    spec.seed = out.seed;
    const SimulatedData sim = simulate(spec);
    const Eigen::VectorXd& y = *sim.train.labels;
    const double ones = y.sum();
    if (ones == 0.0 || ones == static_cast<double>(y.size())) {
      throw DataError("training labels contain a single class");
    }

    const int M = config.intervals.value_or(default_interval_count(spec.grid_size));
    const BSplineBasis basis(1.0, config.degree, M);
    const DesignMatrices design = build_design(sim.train, basis, config.solver.m);

    SolverConfig solver = config.solver;
    if (config.fixed_tuning) {
      std::tie(solver.lambda, solver.gamma) = *config.fixed_tuning;
    } else {
      TuningGrid grid = config.grid;
      grid.seed = out.seed;
      const TuningResult tuned = tune(design.U, y, basis, design, grid, solver, false);
      solver.lambda = tuned.lambda;
      solver.gamma = tuned.gamma;
    }
    out.lambda = solver.lambda;
    out.gamma = solver.gamma;

    const SflrModel model(basis, fit(design.U, y, basis, design, solver), solver.m, sim.train.grid);
    out.converged = model.fit().converged;

    const Eigen::VectorXd p_hat = model.predict_proba(sim.test);
    const Eigen::VectorXd& y_test = *sim.test.labels;
    out.metrics.classification = classification_metrics(y_test, classify(p_hat));
    out.metrics.pmse = pmse(sim.test_probabilities, p_hat);
    const auto truth = true_beta(spec.scenario);
    const std::vector<Interval> null_true = true_null_regions(spec.scenario);
    const IseResult e = ise([&](double t) { return model.beta_hat(t); }, truth, null_true, 1.0);
    out.metrics.ise0 = e.ise0;
    out.metrics.ise1 = e.ise1;

    const std::vector<Interval> found = model.null_regions();
    double covered = 0.0;
    double total = 0.0;
    for (const Interval& z : null_true) {
      covered += overlap_length(z, found);
      total += z.length();
    }
    out.null_recovery = total > 0.0 ? covered / total : 0.0;
    const ClassificationMetrics oracle =
        classification_metrics(y_test, classify(sim.test_probabilities));
    out.oracle_mcr = oracle.mcr.value_or(0.0);
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

ExperimentSummary replicate_experiment(const ExperimentConfig& config) {
  if (config.n_replicates < 1) throw InvalidArgument("replicate_experiment: need at least one replicate");
  config.spec.validate();
  ExperimentSummary summary;
  summary.replicates.resize(static_cast<std::size_t>(config.n_replicates));
  parallel_for(summary.replicates.size(), [&](std::size_t r) {
    summary.replicates[r] = run_replicate(config, static_cast<int>(r));
  });

  std::vector<double> mcr, sens, spec, fdr, miss, ise0, ise1, pm, recovery, oracle;
  auto push = [](std::vector<double>& v, const std::optional<double>& x) {
    if (x) v.push_back(*x);
  };
  for (const ReplicateResult& r : summary.replicates) {
    if (!r.ok) {
      ++summary.failed;
      continue;
    }
    const auto& c = r.metrics.classification;
    push(mcr, c.mcr);
    push(sens, c.sensitivity);
    push(spec, c.specificity);
    push(fdr, c.fdr);
    push(miss, c.miss_rate);
    push(ise0, r.metrics.ise0);
    push(ise1, r.metrics.ise1);
    push(pm, r.metrics.pmse);
    recovery.push_back(r.null_recovery);
    oracle.push_back(r.oracle_mcr);
  }
  summary.mcr = median(mcr);
  summary.sensitivity = median(sens);
  summary.specificity = median(spec);
  summary.fdr = median(fdr);
  summary.miss_rate = median(miss);
  summary.ise0 = median(ise0);
  summary.ise1 = median(ise1);
  summary.pmse = median(pm);
  summary.null_recovery = median(recovery);
  summary.oracle_mcr = median(oracle);
  return summary;
}

std::string replicate_table_csv(const ExperimentSummary& summary) {
  std::ostringstream out;
  out << "replicate,mcr,sensitivity,specificity,fdr,miss_rate,ise0,ise1,pmse,lambda,gamma,converged\n";
  for (const ReplicateResult& r : summary.replicates) {
    out << r.replicate << ',';
    if (!r.ok) {
      out << ",,,,,,,,,,0\n";
      continue;
    }
    const auto& c = r.metrics.classification;
    out << cell(c.mcr) << ',' << cell(c.sensitivity) << ',' << cell(c.specificity) << ','
        << cell(c.fdr) << ',' << cell(c.miss_rate) << ',' << cell(r.metrics.ise0) << ','
        << cell(r.metrics.ise1) << ',' << cell(r.metrics.pmse) << ',' << format_double(r.lambda)
        << ',' << format_double(r.gamma) << ',' << (r.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string median_summary_csv(const ExperimentSummary& s) {
  std::ostringstream out;
  out << "statistic,mcr,sensitivity,specificity,fdr,miss_rate,ise0,ise1,pmse,failed\n";
  out << "median," << cell(s.mcr) << ',' << cell(s.sensitivity) << ',' << cell(s.specificity) << ','
      << cell(s.fdr) << ',' << cell(s.miss_rate) << ',' << cell(s.ise0) << ',' << cell(s.ise1)
      << ',' << cell(s.pmse) << ',' << s.failed << '\n';
  return out.str();
}

}  // namespace sflr
