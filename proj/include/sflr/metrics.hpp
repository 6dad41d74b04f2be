#pragma once

#include "sflr/interval.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>

namespace sflr {

struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;

  long total() const { return tp + fp + tn + fn; }
};

/// Rates are empty when their denominator is zero.
struct ClassificationMetrics {
  ConfusionCounts counts;
  std::optional<double> mcr;          ///< (FP+FN)/N
  std::optional<double> sensitivity;  ///< TP/(TP+FN)
  std::optional<double> specificity;  ///< TN/(TN+FP)
  std::optional<double> fdr;          ///< FP/(TP+FP)
  std::optional<double> miss_rate;    ///< FN/(TP+FN)
};

ClassificationMetrics classification_metrics(const Eigen::VectorXd& y_true,
                                             const Eigen::VectorXd& y_pred);

/// Mean squared difference of true and predicted probabilities.
double pmse(const Eigen::VectorXd& p_true, const Eigen::VectorXd& p_hat);

/// Length-normalized integrated squared errors over the null region Z (ise0)
/// and its complement (ise1); empty when the region has zero length.
struct IseResult {
  std::optional<double> ise0;
  std::optional<double> ise1;
};

/// Composite Simpson on each maximal piece of Z and of [0, T] \ Z, with
/// `grid_points` (odd, >= 3) nodes per piece.
IseResult ise(const std::function<double(double)>& beta_hat,
              const std::function<double(double)>& beta_true,
              const std::vector<Interval>& null_region, double domain_end, int grid_points = 2001);

/// Composite Simpson of f over [a, b] with an odd node count.
double simpson(const std::function<double(double)>& f, double a, double b, int nodes);

struct MetricsReport {
  ClassificationMetrics classification;
  std::optional<double> pmse;
  std::optional<double> ise0;
  std::optional<double> ise1;
};

/// One flat JSON object; undefined values are null.
std::string metrics_to_json(const MetricsReport& report, int indent = 2);

}  // namespace sflr
