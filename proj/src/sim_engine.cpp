#include "itl/sim_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace itl {

const char* to_string(ScenarioKind kind) {
  return kind == ScenarioKind::LinearInteraction ? "linear" : "nonlinear";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "linear") return ScenarioKind::LinearInteraction;
  if (name == "nonlinear") return ScenarioKind::NonlinearInteraction;
  throw ConfigError("unknown scenario kind '" + name +
                    "' (expected linear|nonlinear)");
}

void ScenarioConfig::validate() const {
  if (kind == ScenarioKind::LinearInteraction &&
      !(similarity > 0.0 && similarity <= 1.0)) {
    throw ConfigError("linear scenario needs rho in (0, 1]");
  }
  if (kind == ScenarioKind::NonlinearInteraction && !(similarity > 0.0)) {
    throw ConfigError("nonlinear scenario needs tau > 0");
  }
  if (n1 < 20 || n2 < 20) throw ConfigError("study sizes must be >= 20");
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (test_size < 1) throw ConfigError("test size must be >= 1");
}

double main_effect(const ScenarioConfig&, int study,
                   const Eigen::Ref<const Vector>& x) {
  const double x1 = x[0];
  const double x2 = x[1];
  if (study == 1) return 1.0 + 2.0 * x1 + x2 * x2 + x1 * x2;
  return 1.0 + 2.0 * x1 * x1 + 1.5 * x2 + 0.5 * x1 * x2;
}

double interaction_coefficient(const ScenarioConfig& config, int study,
                               const Eigen::Ref<const Vector>& x) {
  const double x1 = x[0];
  const double x2 = x[1];
  if (config.kind == ScenarioKind::LinearInteraction) {
    const double slope = study == 1 ? 2.0 : 2.0 * config.similarity;
    return 0.2 - x1 - slope * x2;
  }
  const double offset = study == 1 ? 2.2 : config.similarity;
  return -offset + std::exp(x1) + std::exp(x2);
}

Matrix draw_covariates(Philox4x32& rng, Eigen::Index n) {
  Matrix x(n, ScenarioConfig::kDim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < ScenarioConfig::kDim; ++k) x(i, k) = rng.uniform(-1.0, 1.0);
    x(i, 2) = 0.8 * x(i, 2) + 0.2 * x(i, 0);
  }
  return x;
}

TrialDataset generate_study(const ScenarioConfig& config, int study,
                            Eigen::Index n, std::uint64_t seed) {
  Philox4x32 rng(seed, static_cast<std::uint64_t>(study));
  Matrix x = draw_covariates(rng, n);
  std::vector<int> t(static_cast<std::size_t>(n));
  Vector r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t[i] = rng.uniform() < 0.5 ? 1 : -1;
    const Vector xi = x.row(i).transpose();
    r[i] = main_effect(config, study, xi) +
           t[i] * interaction_coefficient(config, study, xi) + rng.normal();
  }
  std::ostringstream label;
  label << "study" << study;
  return TrialDataset(std::move(x), std::move(t), std::move(r),
                      Vector::Constant(n, 0.5), label.str());
}

TruthTable make_truth(const ScenarioConfig& config, int study, const Matrix& x) {
  TruthTable t{x, Vector(x.rows()), Vector(x.rows())};
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector xi = x.row(i).transpose();
    t.main[i] = main_effect(config, study, xi);
    t.coefficient[i] = interaction_coefficient(config, study, xi);
  }
  return t;
}

TruthTable draw_test_set(const ScenarioConfig& config, int study,
                         Eigen::Index size, std::uint64_t seed) {
  Philox4x32 rng(seed, 0x7465737400ull + static_cast<std::uint64_t>(study));
  return make_truth(config, study, draw_covariates(rng, size));
}

MetricsRecord true_metrics(const ScenarioConfig& config, int study,
                           const DecisionRule& rule, Eigen::Index test_size,
                           std::uint64_t seed) {
  return true_metrics(draw_test_set(config, study, test_size, seed), rule);
}

std::vector<int> bayes_recommendations(const ScenarioConfig& config, int study,
                                       const Matrix& x) {
  std::vector<int> d(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    d[i] = decision_sign(interaction_coefficient(config, study, x.row(i).transpose()));
  }
  return d;
}

DecisionRule linear_bayes_rule(const ScenarioConfig& config, int study) {
  if (config.kind != ScenarioKind::LinearInteraction) {
    throw std::invalid_argument("nonlinear Bayes rule is not a linear rule");
  }
  Vector w = Vector::Zero(ScenarioConfig::kDim);
  w[0] = -1.0;
  w[1] = study == 1 ? -2.0 : -2.0 * config.similarity;
  return DecisionRule{LinearRule{w, 0.2}, std::nullopt};
}

ReplicationResult run_replication(const SimulationSetup& setup, int rep) {
  const ScenarioConfig& sc = setup.scenario;
  const std::uint64_t seed = sc.base_seed + static_cast<std::uint64_t>(rep);
  ReplicationResult out;
  out.index = rep;
  try {
    std::vector<Method> fitted;
    for (Method m : setup.methods) {
      if (m != Method::Bayes) fitted.push_back(m);
    }
    std::optional<PipelineResult> pipeline;
    if (!fitted.empty()) {
      const StudyPair pair(generate_study(sc, 1, sc.n1, seed),
                           generate_study(sc, 2, sc.n2, seed));
      TuningGrid grid = setup.grid;
      grid.fold_seed = derive_seed(setup.grid.fold_seed, seed);
      pipeline = fit_pipeline(pair, setup.model, grid, fitted);
    }
    for (int j = 1; j <= 2; ++j) {
      const TruthTable test =
          draw_test_set(sc, j, sc.test_size, derive_seed(seed, 100 + j));
      const MetricsRecord bayes =
          true_metrics(test, bayes_recommendations(sc, j, test.covariates));
      for (Method m : setup.methods) {
        StudyMetrics& slot = out.metrics[m][j - 1];
        slot.bayes = bayes;
        if (m == Method::Bayes) {
          slot.fitted = bayes;
        } else {
          const MethodFit& fit = pipeline->at(m, j);
          slot.fitted = true_metrics(test, fit.rule);
          out.reports[m][j - 1] = fit.report;
        }
      }
    }
  } catch (const std::exception& e) {
    out.failed = true;
    out.failure = e.what();
    out.metrics.clear();
    out.reports.clear();
  }
  return out;
}

const SummaryRow& ExperimentTable::find(Method m, int study, char metric) const {
  for (const auto& r : rows) {
    if (r.method == m && r.study == study && r.metric == metric) return r;
  }
  throw std::out_of_range("experiment table has no such row");
}

namespace {

double quantile7(std::vector<double> sorted, double prob) {
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<SummaryRow> summarize(const BiasSamples& samples) {
  std::vector<SummaryRow> rows;
  for (const auto& [key, biases] : samples) {
    if (biases.empty()) continue;
    const auto& [method, study, metric] = key;
    const double n = static_cast<double>(biases.size());
    double sum = 0.0, sq = 0.0;
    for (double b : biases) {
      sum += b;
      sq += b * b;
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (double b : biases) ss += (b - mean) * (b - mean);
    SummaryRow row{method, study, metric, std::sqrt(sq / n), mean,
                   biases.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0,
                   quantile7(biases, 0.025), quantile7(biases, 0.975),
                   static_cast<int>(biases.size())};
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.method != b.method) return a.method < b.method;
    if (a.study != b.study) return a.study < b.study;
    return a.metric == 'V' && b.metric == 'B';
  });
  return rows;
}

ExperimentTable run_experiment(const SimulationSetup& setup) {
  setup.scenario.validate();
  if (setup.scenario.replications < 2) {
    throw ConfigError("an experiment needs at least 2 replications");
  }
  const int reps = setup.scenario.replications;
  std::vector<ReplicationResult> results(static_cast<std::size_t>(reps));

  int threads = setup.threads > 0
                    ? setup.threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, reps);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < reps; r = next++) {
      results[static_cast<std::size_t>(r)] = run_replication(setup, r);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  ExperimentTable table;
  table.replications = reps;
  BiasSamples samples;
  for (auto& r : results) {
    if (r.failed) {
      table.failures.push_back(std::move(r));
      continue;
    }
    for (Method m : setup.methods) {
      for (int j = 1; j <= 2; ++j) {
        const StudyMetrics& s = r.metrics.at(m)[j - 1];
        samples[{m, j, 'V'}].push_back(s.fitted.value - s.bayes.value);
        samples[{m, j, 'B'}].push_back(s.fitted.benefit - s.bayes.benefit);
      }
    }
  }
  if (table.failures.size() == static_cast<std::size_t>(reps)) {
    throw NumericalError("all replications failed: " + table.failures.front().failure);
  }
  table.rows = summarize(samples);
  return table;
}

}  // namespace itl
