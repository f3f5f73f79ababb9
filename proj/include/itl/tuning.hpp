#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "itl/core_model.hpp"
#include "itl/learners.hpp"

namespace itl {

enum class Method { SepL, IntLS, IntLF, Bayes };
const char* to_string(Method m);
Method method_from_string(const std::string& name);

enum class BandwidthPolicy { Median, Fixed };

// Held-out score maximized by cross-validation.
enum class CvCriterion { IPW, AIPWE };
const char* to_string(CvCriterion c);
CvCriterion cv_criterion_from_string(const std::string& name);

// How a study's kernel is resolved before fitting.
struct ModelConfig {
  KernelKind kernel = KernelKind::Linear;
  BandwidthPolicy bandwidth_policy = BandwidthPolicy::Median;
  double fixed_bandwidth = 1.0;
  std::optional<bool> standardize;  // unset: on for RBF, off for linear
  SolveSettings solver;

  [[nodiscard]] bool use_standardization() const {
    return standardize.value_or(kernel == KernelKind::RBF);
  }
  [[nodiscard]] FitOptions fit_options() const {
    return {use_standardization(), solver};
  }
  // RBF with the median policy takes sigma from the (standardized) study data.
  [[nodiscard]] KernelSpec resolve(const TrialDataset& data) const;
};

struct TuningGrid {
  std::vector<double> lambdas{0x1p-8, 0x1p-6, 0x1p-4, 0x1p-2, 1.0, 4.0};
  // Kappa candidates are these multiples of mean |r| of the study.
  std::vector<double> kappa_multipliers{0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
  int folds = 3;
  std::uint64_t fold_seed = 1;
  bool joint = false;  // tune (lambda, kappa) jointly for IntLS
  CvCriterion criterion = CvCriterion::IPW;

  void validate() const;
  [[nodiscard]] std::vector<double> kappas(const TrialDataset& data) const;
};

using Folds = std::vector<std::vector<Eigen::Index>>;

// Shuffled assignment of 0..n-1 into k folds whose sizes differ by at most
// one; the first n % k folds get the extra element. Indices sorted per fold.
Folds kfold_split(Eigen::Index n, int k, std::uint64_t seed);

using Fitter = std::function<DecisionRule(const TrialDataset& train)>;

struct CvScore {
  double mean = 0.0;
  std::vector<double> folds;
};

// Mean held-out value over folds. IPW scores a fold as
// (1/n_fold) sum r_i 1{t_i = d(x_i)} / pi_i; AIPWE additionally fits per-arm
// outcome models on the training folds.
CvScore cv_score(const TrialDataset& data, const Fitter& fit, const Folds& folds,
                 CvCriterion criterion = CvCriterion::IPW);

// Index of the best mean score; ties go to the earliest candidate in `order`.
std::size_t select_winner(const std::vector<double>& means,
                          const std::vector<std::size_t>& order);

struct TuneResult {
  double selected = 0.0;
  FitResult fit;
  CvTrace trace;
};

TuneResult tune_sepl(const TrialDataset& data, const KernelSpec& spec,
                     const TuningGrid& grid, const FitOptions& options = {});

TuneResult tune_intls(const TrialDataset& data, const DecisionRule& external,
                      const KernelSpec& spec, double lambda,
                      const TuningGrid& grid, const FitOptions& options = {});

struct JointTuneResult {
  double lambda = 0.0;
  double kappa = 0.0;
  FitResult fit;
  CvTrace trace;  // grid holds kappa values, lambda-major order
};

// Product grid over (lambda, kappa); ties prefer smaller kappa, then lambda.
JointTuneResult tune_intls_joint(const TrialDataset& data,
                                 const DecisionRule& external,
                                 const KernelSpec& spec, const TuningGrid& grid,
                                 const FitOptions& options = {});

TuneResult tune_intlf(const TrialDataset& data, const TrialDataset& other,
                      const DecisionRule& external, const KernelSpec& spec,
                      double lambda, double kappa_own, const TuningGrid& grid,
                      const FitOptions& options = {});

struct MethodFit {
  DecisionRule rule;
  FitReport report;
};

struct PipelineResult {
  std::array<KernelSpec, 2> kernels;
  std::map<Method, std::array<MethodFit, 2>> fits;

  [[nodiscard]] const MethodFit& at(Method m, int study) const;
};

// Sequential recipe: SepL (lambda) for both studies, then IntLS (kappa_own)
// against the other study's SepL rule, then IntLF (kappa_cross) with
// lambda and kappa_own held fixed. SepL always runs since the integrative
// fits need it.
PipelineResult fit_pipeline(const StudyPair& pair, const ModelConfig& model,
                            const TuningGrid& grid,
                            const std::vector<Method>& methods);

}  // namespace itl
