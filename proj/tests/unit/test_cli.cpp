#include <doctest.h>

#include <fstream>
#include <sstream>

#include "itl/commands.hpp"
#include "itl/rule_io.hpp"
#include "support.hpp"

using namespace itl;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "itl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::string scenario_ini(double rho, int reps, int n, std::uint64_t seed) {
  std::ostringstream s;
  s << "[scenario]\nkind = linear\nrho = " << rho << "\nn1 = " << n << "\nn2 = " << n
    << "\nreplications = " << reps << "\nseed = " << seed << "\ntest_size = 20000\n";
  return s.str();
}

std::string rule_file(const fs::path& dir, const std::string& name, const DecisionRule& rule) {
  const std::string path = (dir / name).string();
  write_rule(path, rule);
  return path;
}

}  // namespace

TEST_CASE("simulate: minimal config gives 12 rows and identical reruns") {
  const auto dir = testing::scratch_dir("cli_sim");
  write(dir / "min.ini", scenario_ini(0.9, 5, 50, 3));
  const Run a = cli({"simulate", "--config", (dir / "min.ini").string(), "--out",
                     (dir / "a").string()});
  REQUIRE(a.code == 0);
  const Run b = cli({"simulate", "--config", (dir / "min.ini").string(), "--out",
                     (dir / "b").string(), "--threads", "2"});
  REQUIRE(b.code == 0);
  const std::string csv = slurp(dir / "a" / "results.csv");
  CHECK(count_lines(csv) == 13);
  CHECK(csv.rfind("method,study,metric,rmse,mean_bias,sd,q025,q975\n", 0) == 0);
  CHECK(csv == slurp(dir / "b" / "results.csv"));
  CHECK(slurp(dir / "a" / "results.json") == slurp(dir / "b" / "results.json"));
  CHECK(slurp(dir / "a" / "failures.csv") == "replication,message\n");
  const auto json = nlohmann::json::parse(slurp(dir / "a" / "results.json"));
  CHECK(json["rows"].size() == 12);
  CHECK(json["replications"] == 5);

  const Run one = cli({"simulate", "--config", (dir / "min.ini").string(), "--out",
                       (dir / "c").string(), "--method", "sepl", "--reps", "2"});
  REQUIRE(one.code == 0);
  CHECK(count_lines(slurp(dir / "c" / "results.csv")) == 5);
}

TEST_CASE("fit and predict round-trip on a toy CSV") {
  const auto dir = testing::scratch_dir("cli_fit");
  Philox4x32 rng(111);
  const TrialDataset s1 = testing::random_trial(rng, 40, 3);
  const TrialDataset s2 = testing::random_trial(rng, 40, 3);
  write(dir / "s1.csv", trial_csv_string(s1));
  write(dir / "s2.csv", trial_csv_string(s2));
  const Run fit = cli({"fit", "--study1", (dir / "s1.csv").string(), "--study2",
                       (dir / "s2.csv").string(), "--method", "sepl", "--out",
                       (dir / "fit").string()});
  REQUIRE(fit.code == 0);
  CHECK(fs::exists(dir / "fit" / "rule_study1.json"));
  CHECK(fs::exists(dir / "fit" / "rule_study2.json"));
  const auto report = nlohmann::json::parse(slurp(dir / "fit" / "fit_report.json"));
  CHECK(report["method"] == "sepl");
  CHECK(report["studies"][0]["agreement_with_sepl"] == 1.0);
  CHECK(report["studies"][0]["cv"][0]["parameter"] == "lambda");

  // The saved rule reproduces the in-process fit.
  ModelConfig model;
  TuningGrid grid;
  const PipelineResult in_process = fit_pipeline(StudyPair(s1, s2), model, grid, {Method::SepL});
  const DecisionRule saved = read_rule((dir / "fit" / "rule_study1.json").string());
  CHECK(predict_scores(saved, s1.covariates) ==
        predict_scores(in_process.at(Method::SepL, 1).rule, s1.covariates));

  const Run pred = cli({"predict", "--rule", (dir / "fit" / "rule_study1.json").string(),
                        "--data", (dir / "s1.csv").string()});
  REQUIRE(pred.code == 0);
  std::istringstream lines(pred.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "row,score,recommendation");
  const auto expected = recommend_all(in_process.at(Method::SepL, 1).rule, s1.covariates);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    REQUIRE(std::getline(lines, line));
    const int rec = std::stoi(line.substr(line.rfind(',') + 1));
    CHECK(rec == expected[i]);
  }
}

TEST_CASE("fit: kappa grid {0} makes IntLS match SepL") {
  const auto dir = testing::scratch_dir("cli_collapse");
  Philox4x32 rng(112);
  const TrialDataset s1 = testing::random_trial(rng, 40, 2);
  const TrialDataset s2 = testing::random_trial(rng, 40, 2);
  write(dir / "s1.csv", trial_csv_string(s1));
  write(dir / "s2.csv", trial_csv_string(s2));
  write(dir / "k0.ini", "[tuning]\nkappa_multipliers = 0\n[io]\nstudy1 = " +
                            (dir / "s1.csv").string() + "\nstudy2 = " +
                            (dir / "s2.csv").string() + "\n");
  REQUIRE(cli({"fit", "--config", (dir / "k0.ini").string(), "--method", "sepl", "--out",
               (dir / "sepl").string()})
              .code == 0);
  REQUIRE(cli({"fit", "--config", (dir / "k0.ini").string(), "--method", "intls", "--out",
               (dir / "intls").string()})
              .code == 0);
  for (const char* f : {"rule_study1.json", "rule_study2.json"}) {
    const DecisionRule a = read_rule((dir / "sepl" / f).string());
    const DecisionRule b = read_rule((dir / "intls" / f).string());
    CHECK((predict_scores(a, s1.covariates) - predict_scores(b, s1.covariates))
              .cwiseAbs()
              .maxCoeff() < 1e-6);
  }
}

TEST_CASE("fit: IntLF on similar studies is at least as good as SepL on Study 2") {
  const auto dir = testing::scratch_dir("cli_intlf");
  const std::string cfg = (dir / "sc.ini").string();
  double sum_sepl = 0.0, sum_intlf = 0.0;
  for (int s = 0; s < 20; ++s) {
    write(cfg, scenario_ini(0.9, 2, 100, 4000 + static_cast<std::uint64_t>(s)));
    const fs::path data = dir / ("d" + std::to_string(s));
    REQUIRE(cli({"generate", "--config", cfg, "--out", data.string()}).code == 0);
    for (const char* method : {"sepl", "intlf"}) {
      const fs::path out = data / method;
      REQUIRE(cli({"fit", "--study1", (data / "study1.csv").string(), "--study2",
                   (data / "study2.csv").string(), "--method", method, "--out", out.string()})
                  .code == 0);
      const Run eval = cli({"evaluate", "--rule", (out / "rule_study2.json").string(),
                            "--config", cfg, "--study", "2", "--estimator", "true", "--seed",
                            "77"});
      REQUIRE(eval.code == 0);
      const double v = nlohmann::json::parse(eval.out)["value"].get<double>();
      (std::string(method) == "sepl" ? sum_sepl : sum_intlf) += v;
    }
  }
  CHECK(sum_intlf >= sum_sepl);
}

TEST_CASE("predict: zero rule and sign of x1") {
  const auto dir = testing::scratch_dir("cli_predict");
  write(dir / "x.csv", "x1,x2\n-0.5,1\n0,2\n0.3,-1\n");
  const std::string zero = rule_file(dir, "zero.json", DecisionRule::zero_linear(2));
  const Run z = cli({"predict", "--rule", zero, "--data", (dir / "x.csv").string()});
  REQUIRE(z.code == 0);
  CHECK(z.out == "row,score,recommendation\n0,0,1\n1,0,1\n2,0,1\n");

  const std::string x1 = rule_file(
      dir, "x1.json", DecisionRule{LinearRule{(Vector(2) << 1, 0).finished(), 0.0}, std::nullopt});
  const Run s = cli({"predict", "--rule", x1, "--data", (dir / "x.csv").string(), "--out",
                     (dir / "p").string()});
  REQUIRE(s.code == 0);
  CHECK(slurp(dir / "p" / "predictions.csv") ==
        "row,score,recommendation\n0,-0.5,-1\n1,0,1\n2,0.3,1\n");

  write(dir / "wide.csv", "x1,x2,x3\n1,2,3\n");
  CHECK(cli({"predict", "--rule", zero, "--data", (dir / "wide.csv").string()}).code == 2);
}

TEST_CASE("evaluate: IPW of the constant rule is the +1-arm mean") {
  const auto dir = testing::scratch_dir("cli_eval");
  // Three of five rows treated with +1, propensity = empirical fraction.
  write(dir / "d.csv",
        "x1,treatment,outcome,propensity\n0,1,2,0.6\n1,1,4,0.6\n2,1,6,0.6\n3,-1,1,0.4\n4,-1,9,0.4\n");
  const std::string plus = rule_file(dir, "plus.json", DecisionRule::zero_linear(1));
  const Run r = cli({"evaluate", "--rule", plus, "--data", (dir / "d.csv").string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["estimator"] == "ipw");
  CHECK(j["value"].get<double>() == doctest::Approx(4.0));

  const Run a = cli({"evaluate", "--rule", plus, "--data", (dir / "d.csv").string(),
                     "--estimator", "aipwe"});
  CHECK(a.code == 0);
  CHECK(nlohmann::json::parse(a.out)["estimator"] == "aipwe");
}

TEST_CASE("evaluate: the Bayes rule has the largest true benefit") {
  const auto dir = testing::scratch_dir("cli_bayes");
  write(dir / "sc.ini", scenario_ini(0.5, 2, 100, 9));
  ScenarioConfig sc;
  sc.similarity = 0.5;
  std::vector<std::string> rules{
      rule_file(dir, "bayes.json", linear_bayes_rule(sc, 2)),
      rule_file(dir, "zero.json", DecisionRule::zero_linear(10)),
      rule_file(dir, "other.json", linear_bayes_rule(sc, 1)),
      rule_file(dir, "neg.json", linear_bayes_rule(sc, 2).negated())};
  std::vector<double> benefits;
  for (const auto& r : rules) {
    const Run e = cli({"evaluate", "--rule", r, "--config", (dir / "sc.ini").string(),
                       "--study", "2", "--estimator", "true", "--reference", rules[0]});
    REQUIRE(e.code == 0);
    benefits.push_back(nlohmann::json::parse(e.out)["benefit"].get<double>());
    if (&r == &rules[0]) CHECK(nlohmann::json::parse(e.out)["agreement"] == 1.0);
  }
  CHECK(*std::max_element(benefits.begin(), benefits.end()) == benefits[0]);
}

TEST_CASE("exit codes and messages") {
  const auto dir = testing::scratch_dir("cli_errors");
  CHECK(cli({}).code == 1);
  CHECK(cli({"bogus"}).code == 1);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"simulate"}).code == 1);
  CHECK(cli({"simulate", "--config", (dir / "missing.ini").string()}).code == 1);
  write(dir / "bad.ini", "[scenario]\nkind = linear\nrho = 3\n");
  const Run bad = cli({"simulate", "--config", (dir / "bad.ini").string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("rho") != std::string::npos);

  const std::string zero = rule_file(dir, "zero.json", DecisionRule::zero_linear(1));
  CHECK(cli({"evaluate", "--rule", zero, "--estimator", "true"}).code == 1);
  CHECK(cli({"evaluate", "--rule", zero, "--estimator", "magic"}).code == 1);

  write(dir / "t0.csv", "x1,treatment,outcome\n1,0,2\n");
  const Run data = cli({"evaluate", "--rule", zero, "--data", (dir / "t0.csv").string()});
  CHECK(data.code == 2);
  CHECK(data.err.find("treatment") != std::string::npos);

  write(dir / "noprop.csv", "x1,treatment,outcome\n1,1,2\n2,-1,3\n");
  const Run note = cli({"evaluate", "--rule", zero, "--data", (dir / "noprop.csv").string()});
  CHECK(note.code == 0);
  CHECK(note.err.find("propensity") != std::string::npos);

  write(dir / "a.csv", "x1,treatment,outcome\n1,1,2\n2,-1,3\n3,1,1\n");
  write(dir / "b.csv", "z1,treatment,outcome\n1,1,2\n2,-1,3\n3,1,1\n");
  CHECK(cli({"fit", "--study1", (dir / "a.csv").string(), "--study2",
             (dir / "b.csv").string(), "--method", "sepl"})
            .code == 2);
  CHECK(cli({"fit", "--study1", (dir / "a.csv").string()}).code == 1);
  CHECK(cli({"predict", "--rule", (dir / "nope.json").string(), "--data",
             (dir / "a.csv").string()})
            .code == 2);
}
