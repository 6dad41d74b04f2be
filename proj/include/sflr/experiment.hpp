#pragma once

#include "sflr/metrics.hpp"
#include "sflr/simulate.hpp"
#include "sflr/solver.hpp"
#include "sflr/tuning.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sflr {

/// Monte Carlo replication of one scenario: simulate, tune, fit, evaluate.
struct ExperimentConfig {
  ScenarioSpec spec;        ///< spec.seed is the base seed; replicate r uses seed + r
  TuningGrid grid;
  SolverConfig solver;      ///< lambda / gamma are overwritten per replicate
  int n_replicates = 1;
  int degree = 3;
  std::optional<int> intervals;  ///< unset: M = max(30, 10 n^{2/9})
  /// Skip tuning and use this pair for every replicate.
  std::optional<std::pair<double, double>> fixed_tuning;
};

struct ReplicateResult {
  int replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  MetricsReport metrics;
  double lambda = 0.0;
  double gamma = 0.0;
  bool converged = false;
  double null_recovery = 0.0;  ///< fraction of the true null region flagged null
  double oracle_mcr = 0.0;     ///< test MCR of classifying by the true probabilities
};

struct ExperimentSummary {
  std::vector<ReplicateResult> replicates;  ///< in replicate order
  int failed = 0;
  /// Medians over successful replicates; empty when no replicate defines them.
  std::optional<double> mcr, sensitivity, specificity, fdr, miss_rate, ise0, ise1, pmse,
      null_recovery, oracle_mcr;
};

/// Runs one replicate with the given seed. Never throws for data problems;
/// failures come back with ok = false.
ReplicateResult run_replicate(const ExperimentConfig& config, int replicate);

/// Replicates run on worker threads; the result is ordered by replicate and
/// independent of thread count.
ExperimentSummary replicate_experiment(const ExperimentConfig& config);

/// Columns: replicate, mcr, sensitivity, specificity, fdr, miss_rate, ise0,
/// ise1, pmse, lambda, gamma, converged. Failed replicates have empty cells.
std::string replicate_table_csv(const ExperimentSummary& summary);

/// Header plus one "median" row with the metric columns above and the
/// failure count.
std::string median_summary_csv(const ExperimentSummary& summary);

std::optional<double> median(std::vector<double> values);

}  // namespace sflr
