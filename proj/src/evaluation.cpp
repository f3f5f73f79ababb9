#include "itl/evaluation.hpp"

namespace itl {

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::IPW: return "ipw";
    case EstimatorKind::AIPWE: return "aipwe";
    case EstimatorKind::TrueConditional: return "true";
  }
  return "?";
}

EstimatorKind estimator_from_string(const std::string& name) {
  if (name == "ipw") return EstimatorKind::IPW;
  if (name == "aipwe") return EstimatorKind::AIPWE;
  if (name == "true") return EstimatorKind::TrueConditional;
  throw ConfigError("unknown estimator '" + name + "' (expected ipw|aipwe|true)");
}

namespace {

void check_decisions(const TrialDataset& data, const std::vector<int>& d) {
  if (static_cast<Eigen::Index>(d.size()) != data.size()) {
    throw DimensionError("decision vector length != n");
  }
}

std::vector<int> negate(std::vector<int> d) {
  for (int& v : d) v = -v;
  return d;
}

}  // namespace

double ipw_value(const TrialDataset& data, const std::vector<int>& decisions) {
  check_decisions(data, decisions);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (data.treatments[i] == decisions[i]) {
      sum += data.outcomes[i] / data.propensities[i];
    }
  }
  return sum / static_cast<double>(data.size());
}

double ipw_value(const TrialDataset& data, const DecisionRule& rule) {
  return ipw_value(data, recommend_all(rule, data.covariates));
}

ArmModels fit_arm_models(const TrialDataset& data) {
  std::vector<Eigen::Index> plus, minus;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    (data.treatments[i] == 1 ? plus : minus).push_back(i);
  }
  if (plus.empty() || minus.empty()) {
    throw DataError("fit_arm_models: both arms need at least one row");
  }
  auto fit_arm = [&data](const std::vector<Eigen::Index>& rows) {
    const TrialDataset arm = data.subset(rows);
    return weighted_least_squares(arm.covariates, arm.outcomes,
                                  Vector::Ones(arm.size()));
  };
  return {fit_arm(plus), fit_arm(minus)};
}

double aipwe_value(const TrialDataset& data, const std::vector<int>& decisions,
                   const ArmModels& q) {
  check_decisions(data, decisions);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double m = q.q(data.covariates.row(i).transpose(), decisions[i]);
    const double matched = data.treatments[i] == decisions[i] ? 1.0 : 0.0;
    sum += (data.outcomes[i] - m) * matched / data.propensities[i] + m;
  }
  return sum / static_cast<double>(data.size());
}

double aipwe_value(const TrialDataset& data, const DecisionRule& rule,
                   const ArmModels& q) {
  return aipwe_value(data, recommend_all(rule, data.covariates), q);
}

MetricsRecord estimate_metrics(const TrialDataset& data,
                               const DecisionRule& rule, EstimatorKind kind,
                               const std::optional<ArmModels>& q) {
  const std::vector<int> d = recommend_all(rule, data.covariates);
  const std::vector<int> flipped = negate(d);
  MetricsRecord out;
  out.estimator = kind;
  switch (kind) {
    case EstimatorKind::IPW:
      out.value = ipw_value(data, d);
      out.benefit = out.value - ipw_value(data, flipped);
      break;
    case EstimatorKind::AIPWE: {
      const ArmModels models = q ? *q : fit_arm_models(data);
      out.value = aipwe_value(data, d, models);
      out.benefit = out.value - aipwe_value(data, flipped, models);
      break;
    }
    case EstimatorKind::TrueConditional:
      throw std::invalid_argument(
          "true conditional metrics need a scenario, not trial data");
  }
  return out;
}

double benefit(const TrialDataset& data, const DecisionRule& rule,
               EstimatorKind kind, const std::optional<ArmModels>& q) {
  return estimate_metrics(data, rule, kind, q).benefit;
}

MetricsRecord true_metrics(const TruthTable& truth,
                           const std::vector<int>& decisions) {
  const auto n = truth.covariates.rows();
  if (static_cast<Eigen::Index>(decisions.size()) != n) {
    throw DimensionError("true_metrics: decision vector length mismatch");
  }
  if (n == 0) throw DataError("true_metrics: empty test set");
  double value = 0.0;
  double gain = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double effect = decisions[i] * truth.coefficient[i];
    value += truth.main[i] + effect;
    gain += 2.0 * effect;
  }
  MetricsRecord out;
  out.estimator = EstimatorKind::TrueConditional;
  out.value = value / static_cast<double>(n);
  out.benefit = gain / static_cast<double>(n);
  return out;
}

MetricsRecord true_metrics(const TruthTable& truth, const DecisionRule& rule) {
  return true_metrics(truth, recommend_all(rule, truth.covariates));
}

double agreement_rate(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw DimensionError("agreement_rate: length mismatch");
  if (a.empty()) throw DataError("agreement_rate: no rows");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

double agreement_rate(const DecisionRule& a, const DecisionRule& b,
                      const Matrix& x) {
  return agreement_rate(recommend_all(a, x), recommend_all(b, x));
}

}  // namespace itl
