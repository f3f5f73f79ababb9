#include "itl/nuisance.hpp"

#include <cmath>

namespace itl {

GModel weighted_least_squares(const Matrix& x, const Vector& y,
                              const Vector& weights) {
  const auto n = x.rows();
  const auto p = x.cols();
  if (y.size() != n || weights.size() != n) {
    throw DimensionError("weighted_least_squares: length mismatch");
  }
  if ((weights.array() < 0.0).any() || !weights.allFinite()) {
    throw DataError("weighted_least_squares: weights must be finite and >= 0");
  }

  // Design [1, X]; accumulate Z'WZ and Z'Wy.
  Matrix z(n, p + 1);
  z.col(0).setOnes();
  z.rightCols(p) = x;
  const Matrix zw = z.transpose() * weights.asDiagonal();
  Matrix a = zw * z;
  const Vector b = zw * y;

  Eigen::LDLT<Matrix> ldlt(a);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12) {
    a.diagonal().tail(p).array() += kRidgeJitter;
    ldlt.compute(a);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 0.0)) {
      throw NumericalError("weighted_least_squares: singular design");
    }
  }
  const Vector sol = ldlt.solve(b);
  if (!sol.allFinite()) {
    throw NumericalError("weighted_least_squares: non-finite solution");
  }
  return GModel{sol.tail(p), sol[0]};
}

Vector g_weights(const TrialDataset& data) {
  return (1.0 - data.propensities.array()) / data.propensities.array();
}

GModel fit_g(const TrialDataset& data, const Vector& responses) {
  if (responses.size() != data.size()) {
    throw DimensionError("fit_g: responses length != n");
  }
  return weighted_least_squares(data.covariates, responses, g_weights(data));
}

Vector residuals(const TrialDataset& data, const Vector& responses,
                 const GModel& model) {
  if (responses.size() != data.size() ||
      model.coefficients.size() != data.dim()) {
    throw DimensionError("residuals: dimension mismatch");
  }
  return responses - model.predict(data.covariates);
}

}  // namespace itl
