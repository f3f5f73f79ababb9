#include "itl/surrogate.hpp"

#include <cmath>
#include <algorithm>

#include "itl/kernels.hpp"

namespace itl {

double huber_hinge(double u) {
  if (u >= 1.0) return 0.0;
  if (u >= -1.0) return 0.25 * (u - 1.0) * (u - 1.0);
  return -u;
}

double huber_hinge_grad(double u) {
  if (u >= 1.0) return 0.0;
  if (u >= -1.0) return 0.5 * (u - 1.0);
  return -1.0;
}

WeightedInstances sign_flip(const Matrix& covariates, const Vector& deltas,
                            const std::vector<int>& treatments,
                            const Vector& propensities) {
  const auto n = deltas.size();
  if (static_cast<Eigen::Index>(treatments.size()) != n ||
      propensities.size() != n || covariates.rows() != n) {
    throw DimensionError("sign_flip: length mismatch");
  }
  WeightedInstances out{covariates, std::vector<int>(treatments.size()),
                        Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.weights[i] = std::abs(deltas[i]) / propensities[i];
    out.labels[i] = deltas[i] < 0.0 ? -treatments[i] : treatments[i];
  }
  return out;
}

void FusionTerm::validate(Eigen::Index p) const {
  if (!(strength >= 0.0)) throw std::invalid_argument("fusion strength < 0");
  if (!(normalizer > 0.0)) throw std::invalid_argument("fusion normalizer <= 0");
  if (anchor_covariates.cols() != p) {
    throw DimensionError("fusion anchors: column count mismatch");
  }
  if (anchor_scores.size() != anchor_covariates.rows()) {
    throw DimensionError("fusion anchors: score count mismatch");
  }
  for (double s : anchor_scores) {
    if (s != 1.0 && s != -1.0) {
      throw std::invalid_argument("fusion anchor scores must be -1 or +1");
    }
  }
}

SurrogateObjective::SurrogateObjective(const WeightedInstances& instances,
                                       const KernelSpec& spec, double lambda,
                                       const std::optional<FusionTerm>& fusion)
    : spec_(spec), lambda_(lambda), n_(instances.size()) {
  spec_.validate();
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (n_ < 1) throw DimensionError("solve: no instances");
  if (static_cast<Eigen::Index>(instances.labels.size()) != n_ ||
      instances.weights.size() != n_) {
    throw DimensionError("solve: instance arrays have inconsistent lengths");
  }
  if ((instances.weights.array() < 0.0).any()) {
    throw std::invalid_argument("solve: negative instance weight");
  }

  const bool with_fusion = fusion && fusion->strength > 0.0;
  if (fusion) fusion->validate(instances.covariates.cols());

  weights_over_n_ = instances.weights / static_cast<double>(n_);
  labels_.resize(n_);
  for (Eigen::Index i = 0; i < n_; ++i) labels_[i] = instances.labels[i];

  if (with_fusion) {
    anchor_scores_ = fusion->anchor_scores;
    fusion_scale_ = fusion->strength / fusion->normalizer;
  }

  if (spec_.kind == KernelKind::Linear) {
    train_basis_ = instances.covariates;
    if (with_fusion) anchor_basis_ = fusion->anchor_covariates;
    basis_cols_ = instances.covariates.cols();
  } else {
    const auto m = with_fusion ? fusion->anchor_covariates.rows() : 0;
    support_.resize(n_ + m, instances.covariates.cols());
    support_.topRows(n_) = instances.covariates;
    if (with_fusion) support_.bottomRows(m) = fusion->anchor_covariates;
    penalty_ = gram(spec_, support_, support_);
    train_basis_ = penalty_.topRows(n_);
    if (with_fusion) anchor_basis_ = penalty_.bottomRows(m);
    basis_cols_ = support_.rows();
  }
}

double SurrogateObjective::value_and_gradient(const Vector& theta,
                                              Vector& grad) const {
  if (theta.size() != dimension()) {
    throw DimensionError("objective: parameter length mismatch");
  }
  const auto alpha = theta.head(basis_cols_);
  const double beta = theta[basis_cols_];
  const bool kernel = spec_.kind == KernelKind::RBF;

  double loss = 0.0;
  const Vector f = (train_basis_ * alpha).array() + beta;
  Vector coef(n_);
  for (Eigen::Index i = 0; i < n_; ++i) {
    const double u = labels_[i] * f[i];
    loss += weights_over_n_[i] * huber_hinge(u);
    coef[i] = weights_over_n_[i] * labels_[i] * huber_hinge_grad(u);
  }

  Vector anchor_coef;
  if (anchor_basis_.rows() > 0) {
    const Vector g = (anchor_basis_ * alpha).array() + beta;
    anchor_coef.resize(g.size());
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      const double u = anchor_scores_[k] * g[k];
      loss += fusion_scale_ * huber_hinge(u);
      anchor_coef[k] = fusion_scale_ * anchor_scores_[k] * huber_hinge_grad(u);
    }
  }

  Vector penalty_alpha = kernel ? Vector(penalty_ * alpha) : Vector(alpha);
  const double penalty = lambda_ * alpha.dot(penalty_alpha);

  grad.resize(dimension());
  auto grad_alpha = grad.head(basis_cols_);
  grad_alpha = train_basis_.transpose() * coef + 2.0 * lambda_ * penalty_alpha;
  double grad_beta = coef.sum();
  if (anchor_coef.size() > 0) {
    grad_alpha += anchor_basis_.transpose() * anchor_coef;
    grad_beta += anchor_coef.sum();
  }
  grad[basis_cols_] = grad_beta;

  const double total = loss + penalty;
  if (!std::isfinite(total) || !grad.allFinite()) {
    throw NumericalError("surrogate objective is not finite");
  }
  return total;
}

double SurrogateObjective::value(const Vector& theta) const {
  Vector g;
  return value_and_gradient(theta, g);
}

Vector SurrogateObjective::gradient(const Vector& theta) const {
  Vector g;
  value_and_gradient(theta, g);
  return g;
}

DecisionRule SurrogateObjective::rule_from(const Vector& theta) const {
  if (theta.size() != dimension()) {
    throw DimensionError("objective: parameter length mismatch");
  }
  if (spec_.kind == KernelKind::Linear) {
    return DecisionRule{LinearRule{theta.head(basis_cols_), theta[basis_cols_]},
                        std::nullopt};
  }
  return DecisionRule{
      KernelRule{spec_, support_, theta.head(basis_cols_), theta[basis_cols_]},
      std::nullopt};
}

Matrix SurrogateObjective::hessian(const Vector& theta) const {
  if (theta.size() != dimension()) {
    throw DimensionError("objective: parameter length mismatch");
  }
  const auto d = basis_cols_;
  const auto alpha = theta.head(d);
  const double beta = theta[d];
  Matrix h = Matrix::Zero(d + 1, d + 1);

  // Accumulates sum_i c_i [b_i; 1][b_i; 1]' over rows whose margin sits in
  // the quadratic piece of phi.
  auto add_block = [&](const Matrix& basis, const Vector& labels,
                       const Vector& scale) {
    const Vector f = (basis * alpha).array() + beta;
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      const double u = labels[i] * f[i];
      if (u >= -1.0 && u < 1.0 && scale[i] > 0.0) active.push_back(i);
    }
    if (active.empty()) return;
    Matrix rows(static_cast<Eigen::Index>(active.size()), d + 1);
    for (std::size_t k = 0; k < active.size(); ++k) {
      const auto i = active[k];
      const double c = std::sqrt(0.5 * scale[i]);
      rows.row(static_cast<Eigen::Index>(k)).head(d) = c * basis.row(i);
      rows(static_cast<Eigen::Index>(k), d) = c;
    }
    h.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose());
  };

  add_block(train_basis_, labels_, weights_over_n_);
  if (anchor_basis_.rows() > 0) {
    add_block(anchor_basis_, anchor_scores_,
              Vector::Constant(anchor_basis_.rows(), fusion_scale_));
  }
  if (spec_.kind == KernelKind::RBF) {
    h.topLeftCorner(d, d).triangularView<Eigen::Lower>() += 2.0 * lambda_ * penalty_;
  } else {
    h.diagonal().head(d).array() += 2.0 * lambda_;
  }
  return h.selfadjointView<Eigen::Lower>();
}

namespace {

// Solves (H + mu I) x = -g, raising mu until the factorization succeeds.
std::optional<Vector> newton_direction(Matrix h, const Vector& grad,
                                       double damping) {
  const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
  double mu = damping * scale;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Matrix shifted = h;
    shifted.diagonal().array() += mu;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) {
      Vector dir = llt.solve(-grad);
      if (dir.allFinite()) return dir;
    }
    mu *= 100.0;
  }
  return std::nullopt;
}

}  // namespace

SolveResult solve(const WeightedInstances& instances, const KernelSpec& spec,
                  double lambda, const std::optional<FusionTerm>& fusion,
                  const SolveSettings& settings) {
  if (!(settings.gradient_tolerance > 0.0)) {
    throw std::invalid_argument("solve: gradient tolerance must be positive");
  }
  const SurrogateObjective objective(instances, spec, lambda, fusion);

  Vector theta = Vector::Zero(objective.dimension());
  Vector grad;
  double value = objective.value_and_gradient(theta, grad);

  // Backtracks along `dir` from `step`; on success moves theta.
  auto line_search = [&](const Vector& dir, double step) {
    const double slope = grad.dot(dir);
    if (!(slope < 0.0)) return false;
    Vector next_grad;
    for (int b = 0; b < settings.max_backtracks; ++b) {
      const Vector next = theta + step * dir;
      const double next_value = objective.value_and_gradient(next, next_grad);
      if (next_value <= value + settings.armijo * step * slope) {
        theta = next;
        grad = std::move(next_grad);
        value = next_value;
        return true;
      }
      step *= settings.backtrack;
    }
    return false;
  };

  int iter = 0;
  while (grad.lpNorm<Eigen::Infinity>() > settings.gradient_tolerance &&
         iter < settings.max_iterations) {
    ++iter;
    const auto dir =
        newton_direction(objective.hessian(theta), grad, settings.damping);
    if (dir && line_search(*dir, 1.0)) continue;
    const Vector steepest = -grad;
    if (!line_search(steepest, 1.0 / grad.lpNorm<Eigen::Infinity>())) break;
  }

  SolveStats stats;
  stats.objective = value;
  stats.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  stats.iterations = iter;
  stats.converged = stats.gradient_norm <= settings.gradient_tolerance;
  return {objective.rule_from(theta), stats};
}

}  // namespace itl
