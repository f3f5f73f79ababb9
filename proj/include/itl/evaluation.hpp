#pragma once

#include <optional>
#include <vector>

#include "itl/core_model.hpp"
#include "itl/nuisance.hpp"

namespace itl {

enum class EstimatorKind { IPW, AIPWE, TrueConditional };
const char* to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);

struct MetricsRecord {
  double value = 0.0;
  double benefit = 0.0;
  std::optional<double> agreement;
  EstimatorKind estimator = EstimatorKind::IPW;
};

// (1/n) sum r_i 1{t_i = d(x_i)} / pi_i
double ipw_value(const TrialDataset& data, const std::vector<int>& decisions);
double ipw_value(const TrialDataset& data, const DecisionRule& rule);

// Per-arm outcome regressions Q(., +1) and Q(., -1) by least squares on
// each arm's rows.
struct ArmModels {
  GModel plus;
  GModel minus;

  [[nodiscard]] double q(const Eigen::Ref<const Vector>& x, int arm) const {
    return arm == 1 ? plus(x) : minus(x);
  }
  static ArmModels zero(Eigen::Index p) { return {GModel::zero(p), GModel::zero(p)}; }
};
ArmModels fit_arm_models(const TrialDataset& data);

// (1/n) sum [(r_i - m(x_i,d)) 1{t_i = d(x_i)} / pi_i + m(x_i,d)],
// m(x,d) = Q(x, d(x)).
double aipwe_value(const TrialDataset& data, const std::vector<int>& decisions,
                   const ArmModels& q);
double aipwe_value(const TrialDataset& data, const DecisionRule& rule,
                   const ArmModels& q);

// V(d) - V(-d) under IPW or AIPWE. AIPWE without models fits them on `data`.
double benefit(const TrialDataset& data, const DecisionRule& rule,
               EstimatorKind kind, const std::optional<ArmModels>& q = {});
MetricsRecord estimate_metrics(const TrialDataset& data,
                               const DecisionRule& rule, EstimatorKind kind,
                               const std::optional<ArmModels>& q = {});

// Known conditional truth on a fixed set of covariate draws:
// E[R | x, t] = main[i] + t * coefficient[i].
struct TruthTable {
  Matrix covariates;
  Vector main;
  Vector coefficient;
};

MetricsRecord true_metrics(const TruthTable& truth,
                           const std::vector<int>& decisions);
MetricsRecord true_metrics(const TruthTable& truth, const DecisionRule& rule);

double agreement_rate(const std::vector<int>& a, const std::vector<int>& b);
double agreement_rate(const DecisionRule& a, const DecisionRule& b,
                      const Matrix& x);

}  // namespace itl
