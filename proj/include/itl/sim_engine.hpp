#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "itl/core_model.hpp"
#include "itl/evaluation.hpp"
#include "itl/random.hpp"
#include "itl/tuning.hpp"

namespace itl {

enum class ScenarioKind { LinearInteraction, NonlinearInteraction };

const char* to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);

// Two-study generative model. Covariates are Uniform(-1,1) except
// X3 = 0.8 X3' + 0.2 X1; treatments are fair coin flips on {-1,+1}; outcome
// R = m_j(X) + T * c_j(X) + N(0,1). `similarity` is rho for the linear
// scenario and tau for the nonlinear one.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::LinearInteraction;
  double similarity = 0.9;
  int n1 = 100;
  int n2 = 100;
  int replications = 200;
  std::uint64_t base_seed = 20240601;
  int test_size = 100000;

  static constexpr int kDim = 10;

  void validate() const;
  [[nodiscard]] int sample_size(int study) const { return study == 1 ? n1 : n2; }
};

double main_effect(const ScenarioConfig& config, int study,
                   const Eigen::Ref<const Vector>& x);
// c_j(x) with interaction iota_j(x, t) = t * c_j(x).
double interaction_coefficient(const ScenarioConfig& config, int study,
                               const Eigen::Ref<const Vector>& x);

Matrix draw_covariates(Philox4x32& rng, Eigen::Index n);

TrialDataset generate_study(const ScenarioConfig& config, int study,
                            Eigen::Index n, std::uint64_t seed);

TruthTable make_truth(const ScenarioConfig& config, int study, const Matrix& x);
TruthTable draw_test_set(const ScenarioConfig& config, int study,
                         Eigen::Index size, std::uint64_t seed);

// Value and benefit of `rule` on a fresh test set of the given size.
MetricsRecord true_metrics(const ScenarioConfig& config, int study,
                           const DecisionRule& rule, Eigen::Index test_size,
                           std::uint64_t seed);

// d*(x) = sign(c_j(x)) with zero mapped to +1.
std::vector<int> bayes_recommendations(const ScenarioConfig& config, int study,
                                       const Matrix& x);
// For the linear scenario d* is itself a linear rule: sign(0.2 - x1 - 2 rho x2).
DecisionRule linear_bayes_rule(const ScenarioConfig& config, int study);

struct StudyMetrics {
  MetricsRecord fitted;
  MetricsRecord bayes;
};

struct ReplicationResult {
  int index = 0;
  bool failed = false;
  std::string failure;
  // metrics[method][study - 1]
  std::map<Method, std::array<StudyMetrics, 2>> metrics;
  std::map<Method, std::array<FitReport, 2>> reports;
};

struct SimulationSetup {
  ScenarioConfig scenario;
  ModelConfig model;
  TuningGrid grid;
  std::vector<Method> methods{Method::SepL, Method::IntLS, Method::IntLF};
  int threads = 0;  // 0 = hardware concurrency
};

// Replication r draws training data from seed base_seed + r and its own
// test sets, so replications are order-independent.
ReplicationResult run_replication(const SimulationSetup& setup, int rep);

struct SummaryRow {
  Method method;
  int study;
  char metric;  // 'V' or 'B'
  double rmse;
  double mean_bias;
  double sd;
  double q025;
  double q975;
  int count;
};

struct ExperimentTable {
  std::vector<SummaryRow> rows;
  std::vector<ReplicationResult> failures;
  int replications = 0;

  [[nodiscard]] const SummaryRow& find(Method m, int study, char metric) const;
};

// key = (method, study, metric) -> per-replication biases
using BiasSamples = std::map<std::tuple<Method, int, char>, std::vector<double>>;

// RMSE, mean, sample SD and type-7 quantiles of each bias sample, rows in
// (method, study, metric) order with V before B.
std::vector<SummaryRow> summarize(const BiasSamples& samples);

ExperimentTable run_experiment(const SimulationSetup& setup);

}  // namespace itl
