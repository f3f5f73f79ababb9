#pragma once

#include "itl/core_model.hpp"

namespace itl {

// Linear-in-covariates regression function with intercept.
struct GModel {
  Vector coefficients;
  double intercept = 0.0;

  [[nodiscard]] double operator()(const Eigen::Ref<const Vector>& x) const {
    return coefficients.dot(x) + intercept;
  }
  [[nodiscard]] Vector predict(const Matrix& x) const {
    return (x * coefficients).array() + intercept;
  }
  static GModel zero(Eigen::Index p) { return {Vector::Zero(p), 0.0}; }
};

inline constexpr double kRidgeJitter = 1e-8;

// Minimizes sum_i w_i (y_i - b - g'x_i)^2 through the normal equations. A
// jitter of kRidgeJitter is added to the covariate block only when the
// system is numerically rank deficient.
GModel weighted_least_squares(const Matrix& x, const Vector& y,
                              const Vector& weights);

// (1 - pi_i) / pi_i, i.e. pi(-t, x) / pi(t, x) for two-arm trials.
Vector g_weights(const TrialDataset& data);

// Nuisance g-function: weighted regression of `responses` on covariates
// with g_weights(data).
GModel fit_g(const TrialDataset& data, const Vector& responses);

Vector residuals(const TrialDataset& data, const Vector& responses,
                 const GModel& model);

}  // namespace itl
