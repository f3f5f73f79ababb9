#pragma once

#include <filesystem>
#include <string>

#include "itl/core_model.hpp"
#include "itl/random.hpp"

namespace itl::testing {

// Random trial with a linear contrast in x1, for property tests.
inline TrialDataset random_trial(Philox4x32& rng, Eigen::Index n, Eigen::Index p,
                                 bool random_propensity = false) {
  Matrix x(n, p);
  std::vector<int> t(static_cast<std::size_t>(n));
  Vector r(n), pi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < p; ++k) x(i, k) = rng.uniform(-1.0, 1.0);
    pi[i] = random_propensity ? rng.uniform(0.2, 0.8) : 0.5;
    t[static_cast<std::size_t>(i)] = rng.uniform() < pi[i] ? 1 : -1;
    r[i] = 1.0 + x(i, 0) + t[static_cast<std::size_t>(i)] * (0.3 - x(i, 0)) + rng.normal();
  }
  return TrialDataset(std::move(x), std::move(t), std::move(r), std::move(pi), "random");
}

inline Matrix random_matrix(Philox4x32& rng, Eigen::Index n, Eigen::Index p) {
  Matrix x(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < p; ++k) x(i, k) = rng.uniform(-1.0, 1.0);
  }
  return x;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("itl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace itl::testing
