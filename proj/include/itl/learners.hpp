#pragma once

#include "itl/core_model.hpp"
#include "itl/surrogate.hpp"

namespace itl {

struct FitOptions {
  bool standardize = false;  // center/scale covariates with training stats
  SolveSettings solver;
};

struct FitResult {
  DecisionRule rule;
  SolveStats stats;
};

// r~_i = r_i + kappa * pi_i * sign(t_i * f'(x_i)), with sign(0) = 0.
struct PseudoOutcomes {
  Vector values;
  double kappa = 0.0;
};

PseudoOutcomes pseudo_outcomes(const TrialDataset& data, double kappa,
                               const DecisionRule& external);

// Separate learning: g-residuals, sign flip, penalized surrogate fit.
FitResult fit_sepl(const TrialDataset& data, const KernelSpec& spec,
                   double lambda, const FitOptions& options = {});

// Same pipeline on pseudo-outcomes built from the other study's rule.
FitResult fit_intls(const TrialDataset& data, const DecisionRule& external,
                    const KernelSpec& spec, double lambda, double kappa,
                    const FitOptions& options = {});

// IntLS data term plus a fusion term that rewards agreement with the
// external rule on the other study's covariates.
FitResult fit_intlf(const TrialDataset& data, const TrialDataset& other,
                    const DecisionRule& external, const KernelSpec& spec,
                    double lambda, double kappa_own, double kappa_cross,
                    const FitOptions& options = {});

}  // namespace itl
