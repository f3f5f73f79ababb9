#include "itl/run_config.hpp"

#include <charconv>
#include <fstream>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace itl {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

template <class Int>
Int to_int(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config key '" + key + "': expected true|false, got '" + text + "'");
}

std::vector<std::string> to_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    const std::string item = trim(text.substr(start, comma == std::string::npos
                                                         ? std::string::npos
                                                         : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : to_list(text)) out.push_back(to_double(key, item));
  return out;
}

void check_keys(const pt::ptree& section, const std::string& name,
                const std::set<std::string>& allowed) {
  for (const auto& [key, _] : section) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in section [" + name + "]");
    }
  }
}

void read_scenario(const pt::ptree& s, RunConfig& cfg) {
  check_keys(s, "scenario",
             {"kind", "rho", "tau", "n1", "n2", "replications", "seed", "test_size"});
  ScenarioConfig sc;
  if (const auto kind = s.get_optional<std::string>("kind")) {
    sc.kind = scenario_kind_from_string(trim(*kind));
  }
  const char* knob = sc.kind == ScenarioKind::LinearInteraction ? "rho" : "tau";
  const char* other = sc.kind == ScenarioKind::LinearInteraction ? "tau" : "rho";
  if (s.count(other)) {
    throw ConfigError(std::string("[scenario] '") + other + "' does not apply to a " +
                      to_string(sc.kind) + " scenario");
  }
  const auto value = s.get_optional<std::string>(knob);
  if (!value) throw ConfigError(std::string("[scenario] requires '") + knob + "'");
  sc.similarity = to_double(knob, *value);
  if (auto v = s.get_optional<std::string>("n1")) sc.n1 = to_int<int>("n1", *v);
  if (auto v = s.get_optional<std::string>("n2")) sc.n2 = to_int<int>("n2", *v);
  if (auto v = s.get_optional<std::string>("replications")) {
    sc.replications = to_int<int>("replications", *v);
  }
  if (auto v = s.get_optional<std::string>("seed")) {
    sc.base_seed = to_int<std::uint64_t>("seed", *v);
  }
  if (auto v = s.get_optional<std::string>("test_size")) {
    sc.test_size = to_int<int>("test_size", *v);
  }
  sc.validate();
  cfg.scenario = sc;
}

void read_model(const pt::ptree& s, RunConfig& cfg) {
  check_keys(s, "model", {"kernel", "bandwidth", "standardize", "tolerance", "max_iterations"});
  if (auto v = s.get_optional<std::string>("kernel")) {
    cfg.model.kernel = kernel_kind_from_string(trim(*v));
  }
  if (auto v = s.get_optional<std::string>("bandwidth")) {
    if (trim(*v) == "median") {
      cfg.model.bandwidth_policy = BandwidthPolicy::Median;
    } else {
      cfg.model.bandwidth_policy = BandwidthPolicy::Fixed;
      cfg.model.fixed_bandwidth = to_double("bandwidth", *v);
      if (!(cfg.model.fixed_bandwidth > 0.0)) {
        throw ConfigError("[model] bandwidth must be 'median' or a positive number");
      }
    }
  }
  if (auto v = s.get_optional<std::string>("standardize")) {
    if (trim(*v) == "auto") {
      cfg.model.standardize.reset();
    } else {
      cfg.model.standardize = to_bool("standardize", *v);
    }
  }
  if (auto v = s.get_optional<std::string>("tolerance")) {
    cfg.model.solver.gradient_tolerance = to_double("tolerance", *v);
    if (!(cfg.model.solver.gradient_tolerance > 0.0)) {
      throw ConfigError("[model] tolerance must be positive");
    }
  }
  if (auto v = s.get_optional<std::string>("max_iterations")) {
    cfg.model.solver.max_iterations = to_int<int>("max_iterations", *v);
    if (cfg.model.solver.max_iterations < 1) {
      throw ConfigError("[model] max_iterations must be >= 1");
    }
  }
}

void read_tuning(const pt::ptree& s, RunConfig& cfg) {
  check_keys(s, "tuning",
             {"lambdas", "kappa_multipliers", "folds", "seed", "joint", "criterion"});
  if (auto v = s.get_optional<std::string>("lambdas")) {
    cfg.grid.lambdas = to_doubles("lambdas", *v);
  }
  if (auto v = s.get_optional<std::string>("kappa_multipliers")) {
    cfg.grid.kappa_multipliers = to_doubles("kappa_multipliers", *v);
  }
  if (auto v = s.get_optional<std::string>("folds")) cfg.grid.folds = to_int<int>("folds", *v);
  if (auto v = s.get_optional<std::string>("seed")) {
    cfg.grid.fold_seed = to_int<std::uint64_t>("seed", *v);
  }
  if (auto v = s.get_optional<std::string>("joint")) cfg.grid.joint = to_bool("joint", *v);
  if (auto v = s.get_optional<std::string>("criterion")) {
    cfg.grid.criterion = cv_criterion_from_string(trim(*v));
  }
  cfg.grid.validate();
}

void read_io(const pt::ptree& s, RunConfig& cfg) {
  check_keys(s, "io", {"study1", "study2", "out", "methods", "threads"});
  const auto s1 = s.get_optional<std::string>("study1");
  const auto s2 = s.get_optional<std::string>("study2");
  if (s1.has_value() != s2.has_value()) {
    throw ConfigError("[io] needs both study1 and study2, or neither");
  }
  if (s1) cfg.study_paths = std::array<std::string, 2>{trim(*s1), trim(*s2)};
  if (auto v = s.get_optional<std::string>("out")) cfg.out_dir = trim(*v);
  if (auto v = s.get_optional<std::string>("methods")) {
    cfg.methods.clear();
    for (const auto& name : to_list(*v)) {
      const Method m = method_from_string(name);
      if (m == Method::Bayes) throw ConfigError("[io] methods: 'bayes' is not a learner");
      cfg.methods.push_back(m);
    }
    if (cfg.methods.empty()) throw ConfigError("[io] methods is empty");
  }
  if (auto v = s.get_optional<std::string>("threads")) {
    cfg.threads = to_int<int>("threads", *v);
    if (cfg.threads < 0) throw ConfigError("[io] threads must be >= 0");
  }
}

}  // namespace

void RunConfig::validate() const {
  if (scenario.has_value() == study_paths.has_value()) {
    throw ConfigError(
        "configuration needs exactly one of a [scenario] section or study data paths");
  }
  if (scenario) scenario->validate();
  grid.validate();
}

SimulationSetup RunConfig::simulation() const {
  if (!scenario) throw ConfigError("configuration has no [scenario] section");
  SimulationSetup setup;
  setup.scenario = *scenario;
  setup.model = model;
  setup.grid = grid;
  setup.methods = methods;
  setup.threads = threads;
  return setup;
}

RunConfig parse_run_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty()) {
      throw ConfigError("config key '" + name + "' must sit inside a section");
    }
    if (name == "scenario") {
      read_scenario(section, cfg);
    } else if (name == "model") {
      read_model(section, cfg);
    } else if (name == "tuning") {
      read_tuning(section, cfg);
    } else if (name == "io") {
      read_io(section, cfg);
    } else {
      throw ConfigError("unknown config section [" + name + "]");
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return parse_run_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace itl
