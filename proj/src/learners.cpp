#include "itl/learners.hpp"

#include "itl/nuisance.hpp"

namespace itl {

namespace {

struct Prepared {
  Matrix covariates;
  std::optional<Standardization> standardization;
};

Prepared prepare(const TrialDataset& data, const FitOptions& options) {
  if (!options.standardize) return {data.covariates, std::nullopt};
  auto s = Standardization::fit(data.covariates);
  return {s.apply(data.covariates), std::move(s)};
}

WeightedInstances residual_instances(const TrialDataset& data,
                                     const Matrix& covariates,
                                     const Vector& responses) {
  const GModel g = fit_g(data, responses);
  const Vector delta = residuals(data, responses, g);
  return sign_flip(covariates, delta, data.treatments, data.propensities);
}

FitResult run(const WeightedInstances& instances, const KernelSpec& spec,
              double lambda, const std::optional<FusionTerm>& fusion,
              const Prepared& prepared, const FitOptions& options) {
  auto [rule, stats] = solve(instances, spec, lambda, fusion, options.solver);
  rule.standardization = prepared.standardization;
  return {std::move(rule), stats};
}

}  // namespace

PseudoOutcomes pseudo_outcomes(const TrialDataset& data, double kappa,
                               const DecisionRule& external) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
  PseudoOutcomes out{data.outcomes, kappa};
  if (kappa == 0.0) return out;
  const Vector scores = predict_scores(external, data.covariates);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const int s = sign3(data.treatments[i] * scores[i]);
    out.values[i] += kappa * data.propensities[i] * s;
  }
  return out;
}

FitResult fit_sepl(const TrialDataset& data, const KernelSpec& spec,
                   double lambda, const FitOptions& options) {
  const Prepared prepared = prepare(data, options);
  const auto instances =
      residual_instances(data, prepared.covariates, data.outcomes);
  return run(instances, spec, lambda, std::nullopt, prepared, options);
}

FitResult fit_intls(const TrialDataset& data, const DecisionRule& external,
                    const KernelSpec& spec, double lambda, double kappa,
                    const FitOptions& options) {
  return fit_intlf(data, data, external, spec, lambda, kappa, 0.0, options);
}

FitResult fit_intlf(const TrialDataset& data, const TrialDataset& other,
                    const DecisionRule& external, const KernelSpec& spec,
                    double lambda, double kappa_own, double kappa_cross,
                    const FitOptions& options) {
  if (other.dim() != data.dim()) {
    throw DataError("fit_intlf: studies have different covariate counts");
  }
  if (!(kappa_cross >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
  const Prepared prepared = prepare(data, options);
  const PseudoOutcomes pseudo = pseudo_outcomes(data, kappa_own, external);
  const auto instances =
      residual_instances(data, prepared.covariates, pseudo.values);

  std::optional<FusionTerm> fusion;
  if (kappa_cross > 0.0) {
    const Vector raw = predict_scores(external, other.covariates);
    FusionTerm term;
    term.anchor_covariates = prepared.standardization
                                 ? prepared.standardization->apply(other.covariates)
                                 : other.covariates;
    term.anchor_scores =
        raw.unaryExpr([](double v) { return double(decision_sign(v)); });
    term.strength = kappa_cross;
    term.normalizer = static_cast<double>(other.size());
    fusion = std::move(term);
  }
  return run(instances, spec, lambda, fusion, prepared, options);
}

}  // namespace itl
