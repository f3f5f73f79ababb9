#include <doctest.h>

#include <fstream>
#include <sstream>

#include "itl/csv_io.hpp"
#include "itl/learners.hpp"
#include "itl/rule_io.hpp"
#include "itl/run_config.hpp"
#include "support.hpp"

using namespace itl;

TEST_CASE("rule JSON round-trips exactly") {
  Philox4x32 rng(101);
  const TrialDataset d = testing::random_trial(rng, 25, 3);
  FitOptions std_on;
  std_on.standardize = true;
  const std::vector<DecisionRule> rules{
      fit_sepl(d, KernelSpec::linear(), 0.1).rule,
      fit_sepl(d, KernelSpec::rbf(0.37), 0.1, std_on).rule,
      DecisionRule::zero_linear(3)};
  for (const auto& rule : rules) {
    const std::string text = rule_to_json(rule).dump();
    const DecisionRule back = rule_from_json(nlohmann::json::parse(text));
    CHECK(back.is_kernel() == rule.is_kernel());
    CHECK(back.standardization.has_value() == rule.standardization.has_value());
    CHECK(predict_scores(back, d.covariates) == predict_scores(rule, d.covariates));
    CHECK(rule_to_json(back).dump() == text);
  }
}

TEST_CASE("rule JSON rejects malformed documents") {
  using nlohmann::json;
  json good = rule_to_json(DecisionRule::zero_linear(2));
  CHECK_NOTHROW(rule_from_json(good));
  json bad = good;
  bad["format_version"] = 99;
  CHECK_THROWS_AS(rule_from_json(bad), DataError);
  bad = good;
  bad["type"] = "tree";
  CHECK_THROWS_AS(rule_from_json(bad), DataError);
  bad = good;
  bad.erase("weights");
  CHECK_THROWS_AS(rule_from_json(bad), DataError);
  bad = good;
  bad["standardization"] = {{"center", {0.0}}, {"scale", {1.0}}};
  CHECK_THROWS_AS(rule_from_json(bad), DataError);
  CHECK_THROWS_AS(rule_from_json(json::object()), DataError);
}

TEST_CASE("trial CSV round-trips exactly") {
  Philox4x32 rng(102);
  const TrialDataset d = testing::random_trial(rng, 20, 4, true);
  std::istringstream in(trial_csv_string(d, {"a", "b", "c", "d"}));
  const TrialCsv back = parse_trial_csv(in, "x");
  CHECK(back.covariate_names == std::vector<std::string>{"a", "b", "c", "d"});
  CHECK(back.data.covariates == d.covariates);
  CHECK(back.data.treatments == d.treatments);
  CHECK(back.data.outcomes == d.outcomes);
  CHECK(back.data.propensities == d.propensities);
  CHECK_FALSE(back.propensity_defaulted);
}

TEST_CASE("trial CSV parsing rules") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_trial_csv(in, "t");
  };
  SUBCASE("missing propensity defaults to 0.5") {
    const TrialCsv c = parse("x1,treatment,outcome\n0.1,1,2\n0.2,-1,3\n");
    CHECK(c.propensity_defaulted);
    CHECK((c.data.propensities.array() == 0.5).all());
  }
  SUBCASE("covariate columns keep file order around reserved ones") {
    const TrialCsv c = parse("age,treatment,bmi,outcome,score\n1,1,2,9,3\n4,-1,5,8,6\n");
    CHECK(c.covariate_names == std::vector<std::string>{"age", "bmi", "score"});
    CHECK(c.data.covariates(1, 1) == 5.0);
  }
  SUBCASE("whitespace and CRLF are tolerated") {
    const TrialCsv c = parse("x1 , treatment , outcome\r\n 0.5 , 1 , 2 \r\n");
    CHECK(c.data.covariates(0, 0) == 0.5);
  }
  CHECK_THROWS_AS(parse("x1,treatment,outcome\n0.1,0,2\n"), DataError);
  CHECK_THROWS_AS(parse("x1,treatment,outcome\n0.1,2,2\n"), DataError);
  CHECK_THROWS_AS(parse("x1,treatment,outcome\n,1,2\n"), DataError);
  CHECK_THROWS_AS(parse("x1,treatment,outcome\n0.1,1\n"), DataError);
  CHECK_THROWS_AS(parse("x1,treatment,outcome\nabc,1,2\n"), DataError);
  CHECK_THROWS_AS(parse("x1,outcome\n0.1,2\n"), DataError);
  CHECK_THROWS_AS(parse("treatment,outcome\n1,2\n"), DataError);
  CHECK_THROWS_AS(parse("x1,treatment,outcome,propensity\n0.1,1,2,1.5\n"), DataError);
  CHECK_THROWS_AS(parse("x1,x1,treatment,outcome\n0,0,1,2\n"), DataError);
  CHECK_THROWS_AS(parse(""), DataError);
  CHECK_THROWS_AS(parse("x1,treatment,outcome\n"), DataError);
}

TEST_CASE("covariate CSV skips reserved columns") {
  std::istringstream in("x1,treatment,x2\n1,1,2\n3,-1,4\n");
  const CovariateCsv c = parse_covariate_csv(in);
  CHECK(c.names == std::vector<std::string>{"x1", "x2"});
  CHECK(c.covariates(1, 1) == 4.0);
}

TEST_CASE("format_double is round-trip exact") {
  Philox4x32 rng(103);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-20, 20));
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("run config parsing") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_run_config(in);
  };
  const RunConfig c = parse(
      "; comment\n[scenario]\nkind = linear\nrho = 0.3\nn1 = 120\nreplications = 7\nseed = 99\n"
      "test_size = 5000\n[model]\nkernel = rbf\nbandwidth = 0.5\nstandardize = false\n"
      "[tuning]\nlambdas = 0.1, 1\nkappa_multipliers = 0, 2\nfolds = 4\nseed = 3\n"
      "criterion = aipwe\n[io]\nout = res\nmethods = sepl, intlf\nthreads = 2\n");
  REQUIRE(c.scenario.has_value());
  CHECK(c.scenario->similarity == 0.3);
  CHECK(c.scenario->n1 == 120);
  CHECK(c.scenario->n2 == 100);
  CHECK(c.scenario->replications == 7);
  CHECK(c.scenario->base_seed == 99);
  CHECK(c.model.kernel == KernelKind::RBF);
  CHECK(c.model.bandwidth_policy == BandwidthPolicy::Fixed);
  CHECK(c.model.fixed_bandwidth == 0.5);
  CHECK_FALSE(c.model.use_standardization());
  CHECK(c.grid.lambdas == std::vector<double>{0.1, 1.0});
  CHECK(c.grid.folds == 4);
  CHECK(c.grid.fold_seed == 3);
  CHECK(c.grid.criterion == CvCriterion::AIPWE);
  CHECK(c.out_dir == "res");
  CHECK(c.methods == std::vector<Method>{Method::SepL, Method::IntLF});
  CHECK(c.threads == 2);
  CHECK_NOTHROW(c.validate());

  const RunConfig data = parse("[io]\nstudy1 = a.csv\nstudy2 = b.csv\n");
  CHECK(data.study_paths.has_value());
  CHECK_NOTHROW(data.validate());

  CHECK_THROWS_AS(parse("[scenario]\nkind = linear\nrho = 0.3\n[io]\nstudy1 = a\nstudy2 = b\n")
                      .validate(),
                  ConfigError);
  CHECK_THROWS_AS(parse("[model]\nkernel = linear\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse("[scenario]\nkind = linear\ntau = 2.3\n"), ConfigError);
  CHECK_THROWS_AS(parse("[scenario]\nkind = linear\nrho = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse("[scenario]\nkind = linear\nrho = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse("[scenario]\nkind = linear\nrho = 0.5\nfoo = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[extra]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[tuning]\nkappa_multipliers = 1, 2\n"), ConfigError);
  CHECK_THROWS_AS(parse("[io]\nstudy1 = a.csv\n"), ConfigError);
  CHECK_THROWS_AS(parse("[io]\nmethods = bayes\n"), ConfigError);
  CHECK_THROWS_AS(parse("[model]\nbandwidth = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[scenario\n"), ConfigError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/config.ini"), ConfigError);

  const RunConfig nl = parse("[scenario]\nkind = nonlinear\ntau = 2.3\n");
  CHECK(nl.scenario->kind == ScenarioKind::NonlinearInteraction);
  CHECK(nl.scenario->similarity == 2.3);
}

TEST_CASE("shipped example configs load") {
  for (const char* name : {"minimal.ini", "linear_rho03.ini", "linear_rho09.ini",
                           "nonlinear_tau23.ini", "fit_example.ini"}) {
    const std::string path = std::string(ITL_SOURCE_DIR) + "/configs/" + name;
    CAPTURE(path);
    CHECK_NOTHROW(load_run_config(path).validate());
  }
}

TEST_CASE("atomic writes leave no temporary file") {
  const auto dir = testing::scratch_dir("atomic");
  const std::string path = (dir / "sub" / "f.txt").string();
  write_file_atomic(path, "one");
  write_file_atomic(path, "two");
  std::ifstream in(path);
  std::string s;
  in >> s;
  CHECK(s == "two");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
}
