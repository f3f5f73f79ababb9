#include "itl/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "itl/rule_io.hpp"

namespace itl {

using nlohmann::json;

namespace {

std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

json kernel_json(const KernelSpec& spec) {
  json k = {{"kind", to_string(spec.kind)}};
  k["bandwidth"] = spec.kind == KernelKind::RBF ? json(spec.bandwidth) : json(nullptr);
  return k;
}

json trace_json(const CvTrace& t) {
  return {{"parameter", t.parameter},
          {"grid", t.grid},
          {"mean_scores", t.mean_scores},
          {"fold_scores", t.fold_scores},
          {"selected", t.grid.empty() ? json(nullptr) : json(t.grid[t.winner])}};
}

json scenario_json(const ScenarioConfig& sc) {
  return {{"kind", to_string(sc.kind)},
          {sc.kind == ScenarioKind::LinearInteraction ? "rho" : "tau", sc.similarity},
          {"n1", sc.n1},
          {"n2", sc.n2},
          {"replications", sc.replications},
          {"seed", sc.base_seed},
          {"test_size", sc.test_size}};
}

StudyPair load_pair(const RunConfig& config, std::ostream* notices) {
  if (!config.study_paths) throw ConfigError("no study data paths given");
  TrialCsv a = read_trial_csv((*config.study_paths)[0], notices);
  TrialCsv b = read_trial_csv((*config.study_paths)[1], notices);
  if (a.covariate_names != b.covariate_names) {
    throw DataError("study CSVs have different covariate columns");
  }
  return StudyPair(std::move(a.data), std::move(b.data));
}

}  // namespace

std::string results_csv(const ExperimentTable& table) {
  std::ostringstream out;
  out << "method,study,metric,rmse,mean_bias,sd,q025,q975\n";
  for (const auto& r : table.rows) {
    out << to_string(r.method) << ',' << r.study << ',' << r.metric << r.study << ','
        << format_double(r.rmse) << ',' << format_double(r.mean_bias) << ','
        << format_double(r.sd) << ',' << format_double(r.q025) << ','
        << format_double(r.q975) << '\n';
  }
  return out.str();
}

json results_json(const ExperimentTable& table, const SimulationSetup& setup) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"method", to_string(r.method)},
                    {"study", r.study},
                    {"metric", std::string(1, r.metric) + std::to_string(r.study)},
                    {"rmse", r.rmse},
                    {"mean_bias", r.mean_bias},
                    {"sd", r.sd},
                    {"q025", r.q025},
                    {"q975", r.q975},
                    {"count", r.count}});
  }
  json methods = json::array();
  for (Method m : setup.methods) methods.push_back(to_string(m));
  return {{"scenario", scenario_json(setup.scenario)},
          {"kernel", to_string(setup.model.kernel)},
          {"methods", methods},
          {"replications", table.replications},
          {"failed_replications", table.failures.size()},
          {"rows", rows}};
}

std::string failures_csv(const ExperimentTable& table) {
  std::ostringstream out;
  out << "replication,message\n";
  for (const auto& f : table.failures) out << f.index << ',' << csv_quote(f.failure) << '\n';
  return out.str();
}

ExperimentTable cmd_simulate(const RunConfig& config, const std::string& out_dir) {
  const SimulationSetup setup = config.simulation();
  const ExperimentTable table = run_experiment(setup);
  write_file_atomic(join_path(out_dir, "results.csv"), results_csv(table));
  write_file_atomic(join_path(out_dir, "results.json"),
                    results_json(table, setup).dump(2) + "\n");
  write_file_atomic(join_path(out_dir, "failures.csv"), failures_csv(table));
  return table;
}

void cmd_generate(const RunConfig& config, const std::string& out_dir) {
  if (!config.scenario) throw ConfigError("generate needs a [scenario] section");
  const ScenarioConfig& sc = *config.scenario;
  for (int j = 1; j <= 2; ++j) {
    const TrialDataset d = generate_study(sc, j, sc.sample_size(j), sc.base_seed);
    write_file_atomic(join_path(out_dir, "study" + std::to_string(j) + ".csv"),
                      trial_csv_string(d));
  }
}

FitOutput cmd_fit(const RunConfig& config, Method method, const std::string& out_dir,
                  std::ostream* notices) {
  if (method == Method::Bayes) throw ConfigError("fit: method must be sepl|intls|intlf");
  const StudyPair pair = load_pair(config, notices);
  FitOutput out{fit_pipeline(pair, config.model, config.grid, {method}), json::object()};

  json studies = json::array();
  for (int j = 1; j <= 2; ++j) {
    const MethodFit& fit = out.pipeline.at(method, j);
    const MethodFit& base = out.pipeline.at(Method::SepL, j);
    json traces = json::array();
    for (const auto& t : fit.report.traces) traces.push_back(trace_json(t));
    studies.push_back(
        {{"study", j},
         {"data", (*config.study_paths)[static_cast<std::size_t>(j - 1)]},
         {"n", pair.study(j).size()},
         {"kernel", kernel_json(out.pipeline.kernels[static_cast<std::size_t>(j - 1)])},
         {"standardized", config.model.use_standardization()},
         {"lambda", fit.report.lambda},
         {"kappa_own", fit.report.kappa_own},
         {"kappa_cross", fit.report.kappa_cross},
         {"objective", fit.report.objective},
         {"iterations", fit.report.iterations},
         {"converged", fit.report.converged},
         {"cv", traces},
         {"agreement_with_sepl",
          agreement_rate(fit.rule, base.rule, pair.study(j).covariates)}});
    write_rule(join_path(out_dir, "rule_study" + std::to_string(j) + ".json"), fit.rule);
  }
  out.report = {{"method", to_string(method)},
                {"cv_criterion", to_string(config.grid.criterion)},
                {"folds", config.grid.folds},
                {"fold_seed", config.grid.fold_seed},
                {"studies", studies}};
  write_file_atomic(join_path(out_dir, "fit_report.json"), out.report.dump(2) + "\n");
  return out;
}

std::string predictions_csv(const DecisionRule& rule, const Matrix& covariates) {
  const Vector scores = predict_scores(rule, covariates);
  std::ostringstream out;
  out << "row,score,recommendation\n";
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    out << i << ',' << format_double(scores[i]) << ',' << decision_sign(scores[i]) << '\n';
  }
  return out.str();
}

json metrics_json(const MetricsRecord& record, Eigen::Index n) {
  return {{"estimator", to_string(record.estimator)},
          {"value", record.value},
          {"benefit", record.benefit},
          {"agreement", record.agreement ? json(*record.agreement) : json(nullptr)},
          {"n", n}};
}

json cmd_evaluate(const EvaluateRequest& req, std::ostream* notices) {
  const DecisionRule rule = read_rule(req.rule_path);
  std::optional<DecisionRule> reference;
  if (req.reference_rule_path) reference = read_rule(*req.reference_rule_path);

  if (req.estimator == EstimatorKind::TrueConditional) {
    if (!req.scenario) {
      throw ConfigError("--estimator true requires a config with a [scenario] section");
    }
    if (req.study != 1 && req.study != 2) throw ConfigError("--study must be 1 or 2");
    const ScenarioConfig& sc = *req.scenario;
    const TruthTable test = draw_test_set(sc, req.study, sc.test_size,
                                          req.seed.value_or(sc.base_seed));
    MetricsRecord m = true_metrics(test, rule);
    if (reference) m.agreement = agreement_rate(rule, *reference, test.covariates);
    return metrics_json(m, test.covariates.rows());
  }
  if (!req.data_path) throw ConfigError("--estimator ipw|aipwe requires --data");
  const TrialCsv csv = read_trial_csv(*req.data_path, notices);
  MetricsRecord m = estimate_metrics(csv.data, rule, req.estimator);
  if (reference) m.agreement = agreement_rate(rule, *reference, csv.data.covariates);
  return metrics_json(m, csv.data.size());
}

namespace {

void emit(const std::string& out_dir, const std::string& file, const std::string& text,
          std::ostream& out) {
  if (out_dir.empty()) {
    out << text;
  } else {
    write_file_atomic(join_path(out_dir, file), text);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Integrative learning of individualized treatment rules from two trials",
               "itl"};
  app.require_subcommand(1);

  std::string config_path, out_dir, kernel, estimator = "ipw";
  std::string rule_path, data_path, reference_path, study1, study2;
  std::vector<std::string> methods;
  std::string method = "intlf";
  std::uint64_t seed = 0;
  int reps = 0, threads = 0, study = 1;
  bool standardize = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "Output directory");
  };
  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--kernel", kernel, "linear|rbf (overrides config)")
        ->check(CLI::IsMember({"linear", "rbf"}));
    cmd->add_flag("--standardize", standardize, "Standardize covariates before fitting");
  };

  CLI::App* sim = app.add_subcommand("simulate", "Run a simulation experiment");
  sim->add_option("--config", config_path, "Run configuration (INI)")->required();
  auto* sim_seed = sim->add_option("--seed", seed, "Base seed (overrides config)");
  auto* sim_reps = sim->add_option("--reps", reps, "Replications (overrides config)");
  auto* sim_threads = sim->add_option("--threads", threads, "Worker threads (0 = all cores)");
  auto* sim_methods = sim->add_option("--method", methods, "Methods to report (repeatable)")
                          ->check(CLI::IsMember({"sepl", "intls", "intlf"}));
  add_model(sim);
  add_common(sim);

  CLI::App* gen = app.add_subcommand("generate", "Write simulated study CSVs");
  gen->add_option("--config", config_path, "Run configuration with a [scenario]")->required();
  auto* gen_seed = gen->add_option("--seed", seed, "Seed (overrides config)");
  add_common(gen);

  CLI::App* fit = app.add_subcommand("fit", "Fit rules on two study CSVs");
  fit->add_option("--config", config_path, "Run configuration (INI)");
  fit->add_option("--study1", study1, "Study 1 CSV (overrides config)");
  fit->add_option("--study2", study2, "Study 2 CSV (overrides config)");
  fit->add_option("--method", method, "sepl|intls|intlf")
      ->check(CLI::IsMember({"sepl", "intls", "intlf"}));
  auto* fit_seed = fit->add_option("--seed", seed, "Fold seed (overrides config)");
  add_model(fit);
  add_common(fit);

  CLI::App* pred = app.add_subcommand("predict", "Score covariates with a saved rule");
  pred->add_option("--rule", rule_path, "Rule JSON")->required();
  pred->add_option("--data", data_path, "CSV with covariate columns")->required();
  add_common(pred);

  CLI::App* eval = app.add_subcommand("evaluate", "Estimate value and benefit of a rule");
  eval->add_option("--rule", rule_path, "Rule JSON")->required();
  auto* eval_data = eval->add_option("--data", data_path, "Trial CSV (ipw, aipwe)");
  auto* eval_config = eval->add_option("--config", config_path, "Scenario config (true)");
  eval->add_option("--estimator", estimator, "ipw|aipwe|true")
      ->check(CLI::IsMember({"ipw", "aipwe", "true"}));
  eval->add_option("--study", study, "Study whose truth is used (true)");
  auto* eval_seed = eval->add_option("--seed", seed, "Test-set seed (true)");
  auto* eval_ref = eval->add_option("--reference", reference_path,
                                    "Second rule for an agreement rate");
  add_common(eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) config = load_run_config(config_path);
    if (!kernel.empty()) config.model.kernel = kernel_kind_from_string(kernel);
    if (standardize) config.model.standardize = true;
    const std::string dir = out_dir.empty() ? config.out_dir : out_dir;

    if (sim->parsed()) {
      if (!config.scenario) throw ConfigError("simulate needs a [scenario] section");
      if (*sim_seed) config.scenario->base_seed = seed;
      if (*sim_reps) config.scenario->replications = reps;
      if (*sim_threads) config.threads = threads;
      if (*sim_methods) {
        config.methods.clear();
        for (const auto& m : methods) config.methods.push_back(method_from_string(m));
      }
      config.validate();
      const ExperimentTable table = cmd_simulate(config, dir);
      out << "wrote " << join_path(dir, "results.csv") << " (" << table.rows.size()
          << " rows, " << table.failures.size() << " failed replications)\n";
    } else if (gen->parsed()) {
      if (!config.scenario) throw ConfigError("generate needs a [scenario] section");
      if (*gen_seed) config.scenario->base_seed = seed;
      config.validate();
      cmd_generate(config, dir);
      out << "wrote " << join_path(dir, "study1.csv") << " and "
          << join_path(dir, "study2.csv") << '\n';
    } else if (fit->parsed()) {
      if (study1.empty() != study2.empty()) {
        throw ConfigError("--study1 and --study2 must be given together");
      }
      if (!study1.empty()) config.study_paths = std::array<std::string, 2>{study1, study2};
      if (*fit_seed) config.grid.fold_seed = seed;
      config.validate();
      cmd_fit(config, method_from_string(method), dir, &err);
      out << "wrote " << join_path(dir, "rule_study1.json") << ", "
          << join_path(dir, "rule_study2.json") << ", "
          << join_path(dir, "fit_report.json") << '\n';
    } else if (pred->parsed()) {
      const DecisionRule rule = read_rule(rule_path);
      const CovariateCsv csv = read_covariate_csv(data_path);
      emit(out_dir, "predictions.csv", predictions_csv(rule, csv.covariates), out);
    } else if (eval->parsed()) {
      EvaluateRequest req;
      req.rule_path = rule_path;
      if (*eval_data) req.data_path = data_path;
      if (*eval_config) req.scenario = config.scenario;
      req.study = study;
      if (*eval_seed) req.seed = seed;
      if (*eval_ref) req.reference_rule_path = reference_path;
      req.estimator = estimator_from_string(estimator);
      emit(out_dir, "metrics.json", cmd_evaluate(req, &err).dump(2) + "\n", out);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DimensionError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace itl
