#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "itl/sim_engine.hpp"
#include "itl/tuning.hpp"

namespace itl {

// INI-style run configuration. Sections and keys:
//
//   [scenario]  kind = linear|nonlinear, rho (linear) or tau (nonlinear),
//               n1, n2, replications, seed, test_size
//   [model]     kernel = linear|rbf, bandwidth = median|<sigma>,
//               standardize = auto|true|false, tolerance, max_iterations
//   [tuning]    lambdas, kappa_multipliers (comma lists), folds, seed,
//               joint = true|false, criterion = ipw|aipwe
//   [io]        study1, study2 (CSV paths), out, methods, threads
//
// Unknown sections or keys are rejected. Relative paths are taken as given
// (relative to the working directory).
struct RunConfig {
  std::optional<ScenarioConfig> scenario;
  std::optional<std::array<std::string, 2>> study_paths;
  ModelConfig model;
  TuningGrid grid;
  std::vector<Method> methods{Method::SepL, Method::IntLS, Method::IntLF};
  int threads = 0;
  std::string out_dir = ".";

  // Exactly one of scenario and study paths must be present.
  void validate() const;
  [[nodiscard]] SimulationSetup simulation() const;
};

RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

}  // namespace itl
