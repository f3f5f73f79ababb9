#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "itl/core_model.hpp"

namespace itl {

// Trial CSV: a header row, then one row per subject. Columns named
// `treatment`, `outcome` and `propensity` are reserved; every other column is
// a covariate, taken in file order. A missing propensity column means 0.5.
struct TrialCsv {
  TrialDataset data;
  std::vector<std::string> covariate_names;
  bool propensity_defaulted = false;
};

TrialCsv parse_trial_csv(std::istream& in, const std::string& label);
// Prints a notice to `notices` (if non-null) when propensities default.
TrialCsv read_trial_csv(const std::string& path, std::ostream* notices = nullptr);

// Covariate columns only; reserved columns, if present, are skipped.
struct CovariateCsv {
  Matrix covariates;
  std::vector<std::string> names;
};
CovariateCsv parse_covariate_csv(std::istream& in);
CovariateCsv read_covariate_csv(const std::string& path);

std::string format_double(double v);
std::string trial_csv_string(const TrialDataset& data,
                             const std::vector<std::string>& covariate_names = {});

}  // namespace itl
