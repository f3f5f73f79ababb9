#include "itl/core_model.hpp"

#include <cmath>
#include <sstream>

#include "itl/kernels.hpp"

namespace itl {

TrialDataset::TrialDataset(Matrix x, std::vector<int> t, Vector r, Vector pi,
                           std::string label)
    : covariates(std::move(x)),
      treatments(std::move(t)),
      outcomes(std::move(r)),
      propensities(std::move(pi)),
      study_label(std::move(label)) {
  validate();
}

void TrialDataset::validate() const {
  const auto n = covariates.rows();
  if (n < 1) throw DataError("dataset has no rows");
  if (covariates.cols() < 1) throw DataError("dataset has no covariates");
  if (static_cast<Eigen::Index>(treatments.size()) != n ||
      outcomes.size() != n || propensities.size() != n) {
    throw DataError("dataset columns have inconsistent lengths");
  }
  if (!covariates.allFinite() || !outcomes.allFinite()) {
    throw DataError("dataset contains non-finite values");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (treatments[i] != 1 && treatments[i] != -1) {
      std::ostringstream msg;
      msg << "row " << i << ": treatment must be -1 or +1, got "
          << treatments[i];
      throw DataError(msg.str());
    }
    const double pi = propensities[i];
    if (!(pi > 0.0 && pi < 1.0)) {
      std::ostringstream msg;
      msg << "row " << i << ": propensity must lie in (0,1), got " << pi;
      throw DataError(msg.str());
    }
  }
}

TrialDataset TrialDataset::subset(const std::vector<Eigen::Index>& rows) const {
  TrialDataset out;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.covariates.resize(m, covariates.cols());
  out.treatments.resize(rows.size());
  out.outcomes.resize(m);
  out.propensities.resize(m);
  out.study_label = study_label;
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = rows[k];
    out.covariates.row(k) = covariates.row(i);
    out.treatments[k] = treatments[i];
    out.outcomes[k] = outcomes[i];
    out.propensities[k] = propensities[i];
  }
  return out;
}

KernelSpec KernelSpec::rbf(double sigma) {
  KernelSpec spec{KernelKind::RBF, sigma};
  spec.validate();
  return spec;
}

void KernelSpec::validate() const {
  if (kind == KernelKind::RBF && !(bandwidth > 0.0 && std::isfinite(bandwidth))) {
    throw std::invalid_argument("RBF bandwidth must be positive and finite");
  }
}

const char* to_string(KernelKind kind) {
  return kind == KernelKind::Linear ? "linear" : "rbf";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "linear") return KernelKind::Linear;
  if (name == "rbf") return KernelKind::RBF;
  throw ConfigError("unknown kernel '" + name + "' (expected linear|rbf)");
}

Standardization Standardization::fit(const Matrix& x) {
  Standardization s;
  const auto n = x.rows();
  s.center = x.colwise().mean().transpose();
  s.scale = Vector::Ones(x.cols());
  if (n > 1) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double ss = (x.col(c).array() - s.center[c]).square().sum();
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      if (sd > 0.0) s.scale[c] = sd;
    }
  }
  return s;
}

Matrix Standardization::apply(const Matrix& x) const {
  if (x.cols() != center.size()) {
    throw DimensionError("standardization: column count mismatch");
  }
  return ((x.rowwise() - center.transpose()).array().rowwise() /
          scale.transpose().array())
      .matrix();
}

Vector Standardization::apply_row(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != center.size()) {
    throw DimensionError("standardization: length mismatch");
  }
  return ((x - center).array() / scale.array()).matrix();
}

DecisionRule DecisionRule::zero_linear(Eigen::Index p) {
  return DecisionRule{LinearRule{Vector::Zero(p), 0.0}, std::nullopt};
}

Eigen::Index DecisionRule::dim() const {
  return std::visit(
      [](const auto& r) -> Eigen::Index {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LinearRule>) {
          return r.weights.size();
        } else {
          return r.support.cols();
        }
      },
      body);
}

DecisionRule DecisionRule::scaled(double c) const {
  DecisionRule out = *this;
  std::visit(
      [c](auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LinearRule>) {
          r.weights *= c;
        } else {
          r.coefficients *= c;
        }
        r.intercept *= c;
      },
      out.body);
  return out;
}

void DecisionRule::validate() const {
  if (const auto* k = std::get_if<KernelRule>(&body)) {
    k->spec.validate();
    if (k->support.rows() != k->coefficients.size()) {
      throw DimensionError("kernel rule: support rows != coefficient count");
    }
  }
  if (standardization) {
    if (standardization->center.size() != dim() ||
        standardization->scale.size() != dim()) {
      throw DimensionError("rule standardization has wrong length");
    }
  }
}

namespace {

void check_dim(const DecisionRule& rule, Eigen::Index p) {
  if (p != rule.dim()) {
    std::ostringstream msg;
    msg << "rule expects " << rule.dim() << " covariates, got " << p;
    throw DimensionError(msg.str());
  }
}

}  // namespace

double predict_score(const DecisionRule& rule,
                     const Eigen::Ref<const Vector>& x) {
  check_dim(rule, x.size());
  const Vector z = rule.standardization ? rule.standardization->apply_row(x)
                                        : Vector(x);
  return std::visit(
      [&z](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LinearRule>) {
          return r.weights.dot(z) + r.intercept;
        } else {
          double s = r.intercept;
          for (Eigen::Index i = 0; i < r.support.rows(); ++i) {
            s += r.coefficients[i] *
                 kernel_eval(r.spec, r.support.row(i).transpose(), z);
          }
          return s;
        }
      },
      rule.body);
}

Vector predict_scores(const DecisionRule& rule, const Matrix& x) {
  check_dim(rule, x.cols());
  const Matrix z = rule.standardization ? rule.standardization->apply(x) : x;
  return std::visit(
      [&z](const auto& r) -> Vector {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LinearRule>) {
          return (z * r.weights).array() + r.intercept;
        } else {
          const Matrix k = gram(r.spec, z, r.support);
          return (k * r.coefficients).array() + r.intercept;
        }
      },
      rule.body);
}

int recommend(const DecisionRule& rule, const Eigen::Ref<const Vector>& x) {
  return decision_sign(predict_score(rule, x));
}

std::vector<int> recommend_all(const DecisionRule& rule, const Matrix& x) {
  const Vector s = predict_scores(rule, x);
  std::vector<int> out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) out[i] = decision_sign(s[i]);
  return out;
}

StudyPair::StudyPair(TrialDataset s1, TrialDataset s2)
    : study1(std::move(s1)), study2(std::move(s2)) {
  if (study1.dim() != study2.dim()) {
    std::ostringstream msg;
    msg << "studies have different covariate counts (" << study1.dim()
        << " vs " << study2.dim() << ")";
    throw DataError(msg.str());
  }
  study1.validate();
  study2.validate();
}

}  // namespace itl
