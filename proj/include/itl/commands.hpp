#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "itl/csv_io.hpp"
#include "itl/evaluation.hpp"
#include "itl/run_config.hpp"
#include "itl/sim_engine.hpp"

namespace itl {

// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

std::string results_csv(const ExperimentTable& table);
nlohmann::json results_json(const ExperimentTable& table, const SimulationSetup& setup);
std::string failures_csv(const ExperimentTable& table);

// Runs the experiment and writes results.csv, results.json and failures.csv
// (header only when nothing failed) into `out_dir`.
ExperimentTable cmd_simulate(const RunConfig& config, const std::string& out_dir);

// Writes study1.csv and study2.csv drawn from the scenario with its base seed.
void cmd_generate(const RunConfig& config, const std::string& out_dir);

struct FitOutput {
  PipelineResult pipeline;
  nlohmann::json report;
};

// Fits `method` on the two study CSVs named in the config and writes
// rule_study1.json, rule_study2.json and fit_report.json.
FitOutput cmd_fit(const RunConfig& config, Method method, const std::string& out_dir,
                  std::ostream* notices = nullptr);

// Rows "row,score,recommendation" with 0-based row ids.
std::string predictions_csv(const DecisionRule& rule, const Matrix& covariates);

nlohmann::json metrics_json(const MetricsRecord& record, Eigen::Index n);

struct EvaluateRequest {
  std::string rule_path;
  std::optional<std::string> data_path;     // IPW / AIPWE
  std::optional<ScenarioConfig> scenario;   // true metrics
  int study = 1;
  std::optional<std::uint64_t> seed;        // test-set seed, default base seed
  std::optional<std::string> reference_rule_path;
  EstimatorKind estimator = EstimatorKind::IPW;
};
nlohmann::json cmd_evaluate(const EvaluateRequest& request, std::ostream* notices = nullptr);

// Parses arguments and dispatches; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace itl
