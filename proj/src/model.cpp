#include "sflr/model.hpp"

#include "sflr/design.hpp"
#include "sflr/errors.hpp"

#include <json.hpp>

#include <cmath>

namespace sflr {

SflrModel::SflrModel(BSplineBasis basis, FitResult fit, int roughness_order,
                     std::vector<double> training_grid)
    : basis_(std::move(basis)),
      fit_(std::move(fit)),
      m_(roughness_order),
      training_grid_(std::move(training_grid)) {
  if (fit_.b.size() != basis_.basis_count()) {
    throw InvalidArgument("SflrModel: coefficient count does not match basis");
  }
  if (static_cast<int>(fit_.null_mask.size()) != basis_.interval_count()) {
    throw InvalidArgument("SflrModel: null mask length does not match interval count");
  }
}

double SflrModel::beta_hat(double t) const {
  const int j = basis_.interval_of(t);
  if (fit_.null_mask[j]) {
    const auto [lo, hi] = basis_.interval(j);
    if (t > lo && t < hi) return 0.0;
  }
  return basis_.eval_spline(fit_.b, t);
}

Eigen::VectorXd SflrModel::predict_proba(const FunctionalDataset& newdata) const {
  const Eigen::MatrixXd U = compute_U(newdata, basis_);
  const Eigen::VectorXd eta = (U * fit_.b).array() + fit_.alpha;
  Eigen::VectorXd p(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    p(i) = eta(i) >= 0.0 ? 1.0 / (1.0 + std::exp(-eta(i)))
                         : std::exp(eta(i)) / (1.0 + std::exp(eta(i)));
  }
  return p;
}

std::vector<Interval> SflrModel::null_regions() const {
  std::vector<Interval> out;
  const int M = basis_.interval_count();
  for (int j = 0; j < M; ++j) {
    if (!fit_.null_mask[j]) continue;
    const auto [lo, hi] = basis_.interval(j);
    if (!out.empty() && out.back().end == lo) {
      out.back().end = hi;
    } else {
      out.push_back({lo, hi});
    }
  }
  return out;
}

std::string SflrModel::to_json(int indent) const {
  nlohmann::ordered_json j;
  j["domain"] = {basis_.domain_start(), basis_.domain_end()};
  j["degree"] = basis_.degree();
  j["M"] = basis_.interval_count();
  j["b"] = std::vector<double>(fit_.b.data(), fit_.b.data() + fit_.b.size());
  j["alpha"] = fit_.alpha;
  j["null_mask"] = fit_.null_mask;
  j["lambda"] = fit_.lambda;
  j["gamma"] = fit_.gamma;
  j["m"] = m_;
  j["diagnostics"] = {
      {"converged", fit_.converged},
      {"status", fit_.status},
      {"iterations", fit_.iterations},
      {"initial_iterations", fit_.initial_iterations},
      {"polish_iterations", fit_.polish_iterations},
      {"loglik", fit_.loglik},
      {"df", fit_.df},
      {"final_objective", fit_.final_objective},
      {"pseudo_solves", fit_.pseudo_solves},
  };
  if (!training_grid_.empty()) j["training_grid"] = training_grid_;
  return j.dump(indent);
}

SflrModel SflrModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    const auto domain = j.at("domain").get<std::vector<double>>();
    if (domain.size() != 2 || domain[0] != 0.0) {
      throw DataError("model: domain must be [0, T]");
    }
    BSplineBasis basis(domain[1], j.at("degree").get<int>(), j.at("M").get<int>());
    FitResult fit;
    const auto b = j.at("b").get<std::vector<double>>();
    fit.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    fit.alpha = j.at("alpha").get<double>();
    fit.null_mask = j.at("null_mask").get<std::vector<bool>>();
    fit.lambda = j.at("lambda").get<double>();
    fit.gamma = j.at("gamma").get<double>();
    if (j.contains("diagnostics")) {
      const auto& d = j["diagnostics"];
      fit.converged = d.value("converged", false);
      fit.status = d.value("status", std::string{});
      fit.iterations = d.value("iterations", 0);
      fit.initial_iterations = d.value("initial_iterations", 0);
      fit.polish_iterations = d.value("polish_iterations", 0);
      fit.loglik = d.value("loglik", 0.0);
      fit.df = d.value("df", 0.0);
      fit.final_objective = d.value("final_objective", 0.0);
      fit.pseudo_solves = d.value("pseudo_solves", 0);
    }
    std::vector<double> grid;
    if (j.contains("training_grid")) grid = j["training_grid"].get<std::vector<double>>();
    return SflrModel(std::move(basis), std::move(fit), j.at("m").get<int>(), std::move(grid));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

SflrModel fit_model(const FunctionalDataset& data, const BSplineBasis& basis,
                    const SolverConfig& config) {
  data.validate();
  if (!data.labels) throw DataError("fit_model: dataset has no labels");
  const DesignMatrices design = build_design(data, basis, config.m);
  FitResult result = fit(design.U, *data.labels, basis, design, config);
  return SflrModel(basis, std::move(result), config.m, data.grid);
}

Eigen::VectorXd classify(const Eigen::VectorXd& probabilities, double threshold) {
  return (probabilities.array() >= threshold).cast<double>();
}

}  // namespace sflr
