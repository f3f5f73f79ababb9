#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace itl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error taxonomy. The CLI maps each family onto its own exit code.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One randomized trial. Treatments are coded -1/+1 with the shared
// comparator arm as +1; propensities[i] is the probability of the arm
// subject i actually received.
struct TrialDataset {
  Matrix covariates;
  std::vector<int> treatments;
  Vector outcomes;
  Vector propensities;
  std::string study_label;

  TrialDataset() = default;
  TrialDataset(Matrix x, std::vector<int> t, Vector r, Vector pi,
               std::string label = {});

  [[nodiscard]] Eigen::Index size() const { return covariates.rows(); }
  [[nodiscard]] Eigen::Index dim() const { return covariates.cols(); }

  // Throws DataError describing the first violated invariant.
  void validate() const;

  // Rows listed in `rows`, in that order.
  [[nodiscard]] TrialDataset subset(const std::vector<Eigen::Index>& rows) const;
};

enum class KernelKind { Linear, RBF };

struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  double bandwidth = 1.0;  // sigma in exp(-sigma * |x - y|^2); RBF only

  static KernelSpec linear() { return {KernelKind::Linear, 1.0}; }
  static KernelSpec rbf(double sigma);

  void validate() const;
};

const char* to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

// Per-column affine map applied to covariates before a rule is evaluated.
struct Standardization {
  Vector center;
  Vector scale;

  // Column means and sample standard deviations; constant columns get scale 1.
  static Standardization fit(const Matrix& x);

  [[nodiscard]] Matrix apply(const Matrix& x) const;
  [[nodiscard]] Vector apply_row(const Eigen::Ref<const Vector>& x) const;
};

struct LinearRule {
  Vector weights;
  double intercept = 0.0;
};

struct KernelRule {
  KernelSpec spec;
  Matrix support;  // already in the standardized space
  Vector coefficients;
  double intercept = 0.0;
};

// f(x) with recommendation sign(f(x)); zero scores recommend +1.
struct DecisionRule {
  std::variant<LinearRule, KernelRule> body;
  std::optional<Standardization> standardization;

  static DecisionRule zero_linear(Eigen::Index p);

  [[nodiscard]] Eigen::Index dim() const;
  [[nodiscard]] bool is_kernel() const {
    return std::holds_alternative<KernelRule>(body);
  }

  // Multiplies every coefficient and the intercept by c.
  [[nodiscard]] DecisionRule scaled(double c) const;
  [[nodiscard]] DecisionRule negated() const { return scaled(-1.0); }

  void validate() const;
};

double predict_score(const DecisionRule& rule,
                     const Eigen::Ref<const Vector>& x);
Vector predict_scores(const DecisionRule& rule, const Matrix& x);

int recommend(const DecisionRule& rule, const Eigen::Ref<const Vector>& x);
std::vector<int> recommend_all(const DecisionRule& rule, const Matrix& x);

// Deployed-rule sign: zero maps to +1 (the shared comparator).
inline int decision_sign(double score) { return score >= 0.0 ? 1 : -1; }

// Three-valued sign used when building pseudo-outcomes.
inline int sign3(double v) { return (v > 0.0) - (v < 0.0); }

struct CvTrace {
  std::string parameter;  // "lambda", "kappa_own" or "kappa_cross"
  std::vector<double> grid;
  std::vector<double> mean_scores;
  std::vector<std::vector<double>> fold_scores;
  std::size_t winner = 0;
};

struct FitReport {
  std::string method;
  double lambda = 0.0;
  double kappa_own = 0.0;
  double kappa_cross = 0.0;
  std::vector<CvTrace> traces;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct StudyPair {
  TrialDataset study1;
  TrialDataset study2;

  StudyPair(TrialDataset s1, TrialDataset s2);

  [[nodiscard]] const TrialDataset& study(int j) const {
    return j == 1 ? study1 : study2;
  }
};

}  // namespace itl
