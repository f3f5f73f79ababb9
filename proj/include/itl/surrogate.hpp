#pragma once

#include <optional>

#include "itl/core_model.hpp"

namespace itl {

// Huberized hinge: 0 for u >= 1, (u-1)^2/4 on [-1, 1), -u below -1.
double huber_hinge(double u);
double huber_hinge_grad(double u);

// Sign-flipped weighted classification problem. Weights already include
// the division by the propensity.
struct WeightedInstances {
  Matrix covariates;
  std::vector<int> labels;
  Vector weights;

  [[nodiscard]] Eigen::Index size() const { return covariates.rows(); }
};

// weight_i = |delta_i| / pi_i, label_i = t_i * sign(delta_i) with sign(0) = +1.
WeightedInstances sign_flip(const Matrix& covariates, const Vector& deltas,
                            const std::vector<int>& treatments,
                            const Vector& propensities);

// Agreement penalty (strength / normalizer) * sum_k phi(f(a_k) * s_k), where
// s_k in {-1,+1} are the other study's recommendations at its own covariates.
struct FusionTerm {
  Matrix anchor_covariates;
  Vector anchor_scores;
  double strength = 0.0;
  double normalizer = 1.0;

  void validate(Eigen::Index p) const;
};

struct SolveSettings {
  double gradient_tolerance = 1e-6;  // infinity norm
  int max_iterations = 1000;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
  double damping = 1e-10;  // relative Levenberg shift on the Newton system
};

struct SolveStats {
  double objective = 0.0;
  double gradient_norm = 0.0;  // infinity norm at the returned point
  int iterations = 0;
  bool converged = false;
};

struct SolveResult {
  DecisionRule rule;
  SolveStats stats;
};

// Regularized surrogate risk over parameters theta = (alpha, beta):
//
//   (1/n) sum_i w_i phi(y_i f(x_i)) + lambda |f|_H^2
//     + (kappa / m) sum_k phi(s_k f(a_k))
//
// Linear: f(x) = alpha'x + beta, |f|^2 = alpha'alpha.
// Kernel: f(x) = sum_i alpha_i k(x, s_i) + beta over the support
// [training covariates; anchor covariates], |f|^2 = alpha' K alpha.
// The intercept is not penalized. A fusion term of zero strength is dropped,
// so the support then holds the training covariates only.
class SurrogateObjective {
 public:
  SurrogateObjective(const WeightedInstances& instances, const KernelSpec& spec,
                     double lambda, const std::optional<FusionTerm>& fusion);

  [[nodiscard]] Eigen::Index dimension() const { return basis_cols_ + 1; }
  [[nodiscard]] double value(const Vector& theta) const;
  [[nodiscard]] Vector gradient(const Vector& theta) const;
  double value_and_gradient(const Vector& theta, Vector& grad) const;
  // Generalized Hessian, taking phi'' = 1/2 on [-1, 1) and 0 elsewhere.
  [[nodiscard]] Matrix hessian(const Vector& theta) const;

  // The decision rule encoded by theta (no standardization attached).
  [[nodiscard]] DecisionRule rule_from(const Vector& theta) const;

 private:
  KernelSpec spec_;
  double lambda_;
  Eigen::Index n_;
  Eigen::Index basis_cols_;
  Vector weights_over_n_;
  Vector labels_;
  Matrix train_basis_;   // n x d: covariates (linear) or K rows (kernel)
  Matrix anchor_basis_;  // m x d, empty without fusion
  Vector anchor_scores_;
  double fusion_scale_ = 0.0;
  Matrix penalty_;  // K for kernels; unused (identity) for linear
  Matrix support_;
};

// Damped Newton iterations on the generalized Hessian with Armijo
// backtracking, started from zero. A direction that fails the line search
// is replaced by steepest descent.
SolveResult solve(const WeightedInstances& instances, const KernelSpec& spec,
                  double lambda, const std::optional<FusionTerm>& fusion,
                  const SolveSettings& settings = {});

}  // namespace itl
