#include "sflr/metrics.hpp"

#include "sflr/errors.hpp"

#include <json.hpp>

#include <string>

namespace sflr {

namespace {

std::optional<double> ratio(long num, long den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

bool is_binary(double v) { return v == 0.0 || v == 1.0; }

}  // namespace

ClassificationMetrics classification_metrics(const Eigen::VectorXd& y_true,
                                             const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw InvalidArgument("classification_metrics: length mismatch (" +
                          std::to_string(y_true.size()) + " vs " + std::to_string(y_pred.size()) +
                          ")");
  }
  ClassificationMetrics m;
  auto& c = m.counts;
  for (Eigen::Index i = 0; i < y_true.size(); ++i) {
    if (!is_binary(y_true(i)) || !is_binary(y_pred(i))) {
      throw InvalidArgument("classification_metrics: labels must be 0 or 1");
    }
    const bool t = y_true(i) == 1.0;
    const bool p = y_pred(i) == 1.0;
    if (t && p) ++c.tp;
    else if (!t && p) ++c.fp;
    else if (!t && !p) ++c.tn;
    else ++c.fn;
  }
  m.mcr = ratio(c.fp + c.fn, c.total());
  m.sensitivity = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.tn + c.fp);
  m.fdr = ratio(c.fp, c.tp + c.fp);
  m.miss_rate = ratio(c.fn, c.tp + c.fn);
  return m;
}

double pmse(const Eigen::VectorXd& p_true, const Eigen::VectorXd& p_hat) {
  if (p_true.size() != p_hat.size()) throw InvalidArgument("pmse: length mismatch");
  if (p_true.size() == 0) throw InvalidArgument("pmse: empty input");
  return (p_true - p_hat).squaredNorm() / static_cast<double>(p_true.size());
}

double simpson(const std::function<double(double)>& f, double a, double b, int nodes) {
  if (nodes < 3 || nodes % 2 == 0) throw InvalidArgument("simpson: node count must be odd and >= 3");
  const int panels = nodes - 1;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int k = 1; k < panels; ++k) s += (k % 2 == 1 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

IseResult ise(const std::function<double(double)>& beta_hat,
              const std::function<double(double)>& beta_true,
              const std::vector<Interval>& null_region, double domain_end, int grid_points) {
  if (grid_points < 3 || grid_points % 2 == 0) {
    throw InvalidArgument("ise: grid_points must be odd and >= 3");
  }
  const std::vector<Interval> zero = normalize_intervals(null_region, domain_end);
  const std::vector<Interval> rest = complement(zero, domain_end);
  auto sq_err = [&](double t) {
    const double e = beta_hat(t) - beta_true(t);
    return e * e;
  };
  auto component = [&](const std::vector<Interval>& pieces) -> std::optional<double> {
    double length = 0.0;
    double total = 0.0;
    for (const Interval& iv : pieces) {
      if (iv.length() <= 0.0) continue;
      length += iv.length();
      total += simpson(sq_err, iv.start, iv.end, grid_points);
    }
    if (length <= 0.0) return std::nullopt;
    return total / length;
  };
  return {component(zero), component(rest)};
}

std::string metrics_to_json(const MetricsReport& r, int indent) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  const auto& c = r.classification;
  nlohmann::ordered_json j = {
      {"mcr", opt(c.mcr)},
      {"sensitivity", opt(c.sensitivity)},
      {"specificity", opt(c.specificity)},
      {"fdr", opt(c.fdr)},
      {"miss_rate", opt(c.miss_rate)},
      {"pmse", opt(r.pmse)},
      {"ise0", opt(r.ise0)},
      {"ise1", opt(r.ise1)},
      {"tp", c.counts.tp},
      {"fp", c.counts.fp},
      {"tn", c.counts.tn},
      {"fn", c.counts.fn},
  };
  return j.dump(indent);
}

}  // namespace sflr
