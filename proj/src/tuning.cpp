#include "itl/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "itl/evaluation.hpp"
#include "itl/kernels.hpp"
#include "itl/random.hpp"

namespace itl {

const char* to_string(Method m) {
  switch (m) {
    case Method::SepL: return "sepl";
    case Method::IntLS: return "intls";
    case Method::IntLF: return "intlf";
    case Method::Bayes: return "bayes";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  if (name == "sepl") return Method::SepL;
  if (name == "intls") return Method::IntLS;
  if (name == "intlf") return Method::IntLF;
  if (name == "bayes") return Method::Bayes;
  throw ConfigError("unknown method '" + name + "' (expected sepl|intls|intlf)");
}

const char* to_string(CvCriterion c) {
  return c == CvCriterion::IPW ? "ipw" : "aipwe";
}

CvCriterion cv_criterion_from_string(const std::string& name) {
  if (name == "ipw") return CvCriterion::IPW;
  if (name == "aipwe") return CvCriterion::AIPWE;
  throw ConfigError("unknown CV criterion '" + name + "' (expected ipw|aipwe)");
}

KernelSpec ModelConfig::resolve(const TrialDataset& data) const {
  if (kernel == KernelKind::Linear) return KernelSpec::linear();
  if (bandwidth_policy == BandwidthPolicy::Fixed) {
    return KernelSpec::rbf(fixed_bandwidth);
  }
  const Matrix x = use_standardization()
                       ? Standardization::fit(data.covariates).apply(data.covariates)
                       : data.covariates;
  return KernelSpec::rbf(median_bandwidth(x));
}

void TuningGrid::validate() const {
  if (lambdas.empty()) throw ConfigError("lambda grid is empty");
  if (kappa_multipliers.empty()) throw ConfigError("kappa grid is empty");
  for (double l : lambdas) {
    if (!(l > 0.0)) throw ConfigError("lambda grid values must be positive");
  }
  for (double k : kappa_multipliers) {
    if (!(k >= 0.0)) throw ConfigError("kappa grid values must be >= 0");
  }
  if (std::find(kappa_multipliers.begin(), kappa_multipliers.end(), 0.0) ==
      kappa_multipliers.end()) {
    throw ConfigError("kappa grid must contain 0");
  }
  if (folds < 2) throw ConfigError("need at least 2 folds");
}

std::vector<double> TuningGrid::kappas(const TrialDataset& data) const {
  const double scale = data.outcomes.cwiseAbs().mean();
  std::vector<double> out;
  out.reserve(kappa_multipliers.size());
  for (double k : kappa_multipliers) out.push_back(k * scale);
  return out;
}

Folds kfold_split(Eigen::Index n, int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("kfold_split: k must be >= 1");
  if (k > n) throw std::invalid_argument("kfold_split: more folds than rows");
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Philox4x32 rng(seed, 0x666f6c64);  // "fold"
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  Folds folds(static_cast<std::size_t>(k));
  const auto base = n / k;
  const auto extra = n % k;
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    const auto size = static_cast<std::size_t>(base + (f < extra ? 1 : 0));
    folds[f].assign(perm.begin() + pos, perm.begin() + pos + size);
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

CvScore cv_score(const TrialDataset& data, const Fitter& fit,
                 const Folds& folds, CvCriterion criterion) {
  CvScore out;
  std::vector<char> held(static_cast<std::size_t>(data.size()));
  for (const auto& fold : folds) {
    std::fill(held.begin(), held.end(), 0);
    for (auto i : fold) held[i] = 1;
    std::vector<Eigen::Index> train;
    train.reserve(held.size() - fold.size());
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      if (!held[i]) train.push_back(i);
    }
    const TrialDataset train_data = data.subset(train);
    const DecisionRule rule = fit(train_data);
    const TrialDataset held_out = data.subset(fold);
    if (criterion == CvCriterion::IPW) {
      out.folds.push_back(ipw_value(held_out, rule));
    } else {
      out.folds.push_back(
          aipwe_value(held_out, rule, fit_arm_models(train_data)));
    }
  }
  out.mean = std::accumulate(out.folds.begin(), out.folds.end(), 0.0) /
             static_cast<double>(out.folds.size());
  return out;
}

std::size_t select_winner(const std::vector<double>& means,
                          const std::vector<std::size_t>& order) {
  std::size_t best = order.front();
  for (std::size_t idx : order) {
    const double tol = 1e-12 * std::max(1.0, std::abs(means[best]));
    if (means[idx] > means[best] + tol) best = idx;
  }
  return best;
}

namespace {

std::vector<std::size_t> ascending_order(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return values[a] < values[b]; });
  return order;
}

// Scores every candidate by CV, picks the winner and refits on all of `data`.
TuneResult tune_one(const TrialDataset& data, const std::string& name,
                    const std::vector<double>& candidates,
                    const std::function<FitResult(const TrialDataset&, double)>& fit,
                    const TuningGrid& grid) {
  grid.validate();
  const Folds folds = kfold_split(data.size(), grid.folds, grid.fold_seed);
  TuneResult out;
  out.trace.parameter = name;
  out.trace.grid = candidates;
  for (double c : candidates) {
    const CvScore score = cv_score(
        data, [&](const TrialDataset& train) { return fit(train, c).rule; },
        folds, grid.criterion);
    out.trace.mean_scores.push_back(score.mean);
    out.trace.fold_scores.push_back(score.folds);
  }
  out.trace.winner =
      select_winner(out.trace.mean_scores, ascending_order(candidates));
  out.selected = candidates[out.trace.winner];
  out.fit = fit(data, out.selected);
  return out;
}

}  // namespace

TuneResult tune_sepl(const TrialDataset& data, const KernelSpec& spec,
                     const TuningGrid& grid, const FitOptions& options) {
  return tune_one(
      data, "lambda", grid.lambdas,
      [&](const TrialDataset& d, double lambda) {
        return fit_sepl(d, spec, lambda, options);
      },
      grid);
}

TuneResult tune_intls(const TrialDataset& data, const DecisionRule& external,
                      const KernelSpec& spec, double lambda,
                      const TuningGrid& grid, const FitOptions& options) {
  return tune_one(
      data, "kappa_own", grid.kappas(data),
      [&](const TrialDataset& d, double kappa) {
        return fit_intls(d, external, spec, lambda, kappa, options);
      },
      grid);
}

JointTuneResult tune_intls_joint(const TrialDataset& data,
                                 const DecisionRule& external,
                                 const KernelSpec& spec, const TuningGrid& grid,
                                 const FitOptions& options) {
  grid.validate();
  const Folds folds = kfold_split(data.size(), grid.folds, grid.fold_seed);
  const std::vector<double> kappas = grid.kappas(data);
  std::vector<std::pair<double, double>> cand;  // (lambda, kappa)
  for (double l : grid.lambdas) {
    for (double k : kappas) cand.emplace_back(l, k);
  }
  JointTuneResult out;
  out.trace.parameter = "lambda_kappa_own";
  for (const auto& [l, k] : cand) {
    out.trace.grid.push_back(k);
    const CvScore score = cv_score(
        data,
        [&](const TrialDataset& train) {
          return fit_intls(train, external, spec, l, k, options).rule;
        },
        folds, grid.criterion);
    out.trace.mean_scores.push_back(score.mean);
    out.trace.fold_scores.push_back(score.folds);
  }
  std::vector<std::size_t> order(cand.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (cand[a].second != cand[b].second) return cand[a].second < cand[b].second;
    return cand[a].first < cand[b].first;
  });
  out.trace.winner = select_winner(out.trace.mean_scores, order);
  out.lambda = cand[out.trace.winner].first;
  out.kappa = cand[out.trace.winner].second;
  out.fit = fit_intls(data, external, spec, out.lambda, out.kappa, options);
  return out;
}

TuneResult tune_intlf(const TrialDataset& data, const TrialDataset& other,
                      const DecisionRule& external, const KernelSpec& spec,
                      double lambda, double kappa_own, const TuningGrid& grid,
                      const FitOptions& options) {
  return tune_one(
      data, "kappa_cross", grid.kappas(data),
      [&](const TrialDataset& d, double kappa_cross) {
        return fit_intlf(d, other, external, spec, lambda, kappa_own,
                         kappa_cross, options);
      },
      grid);
}

const MethodFit& PipelineResult::at(Method m, int study) const {
  const auto it = fits.find(m);
  if (it == fits.end()) {
    throw std::out_of_range(std::string("pipeline has no fit for ") + to_string(m));
  }
  return it->second.at(static_cast<std::size_t>(study - 1));
}

namespace {

FitReport make_report(Method m, const FitResult& fit) {
  FitReport r;
  r.method = to_string(m);
  r.objective = fit.stats.objective;
  r.iterations = fit.stats.iterations;
  r.converged = fit.stats.converged;
  return r;
}

}  // namespace

PipelineResult fit_pipeline(const StudyPair& pair, const ModelConfig& model,
                            const TuningGrid& grid,
                            const std::vector<Method>& methods) {
  grid.validate();
  const auto wants = [&](Method m) {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
  };
  const bool integrative = wants(Method::IntLS) || wants(Method::IntLF);
  const FitOptions options = model.fit_options();

  PipelineResult out;
  std::array<TuningGrid, 2> grids{grid, grid};
  for (int j = 0; j < 2; ++j) {
    grids[j].fold_seed = derive_seed(grid.fold_seed, static_cast<std::uint64_t>(j + 1));
    out.kernels[j] = model.resolve(pair.study(j + 1));
  }

  std::array<MethodFit, 2> sepl;
  std::array<double, 2> lambdas{};
  for (int j = 0; j < 2; ++j) {
    TuneResult t = tune_sepl(pair.study(j + 1), out.kernels[j], grids[j], options);
    lambdas[j] = t.selected;
    sepl[j].report = make_report(Method::SepL, t.fit);
    sepl[j].report.lambda = t.selected;
    sepl[j].report.traces.push_back(std::move(t.trace));
    sepl[j].rule = std::move(t.fit.rule);
  }
  out.fits[Method::SepL] = sepl;
  if (!integrative) return out;

  std::array<MethodFit, 2> intls;
  for (int j = 0; j < 2; ++j) {
    const TrialDataset& data = pair.study(j + 1);
    const DecisionRule& external = sepl[1 - j].rule;
    if (grid.joint) {
      JointTuneResult t =
          tune_intls_joint(data, external, out.kernels[j], grids[j], options);
      lambdas[j] = t.lambda;
      intls[j].report = make_report(Method::IntLS, t.fit);
      intls[j].report.lambda = t.lambda;
      intls[j].report.kappa_own = t.kappa;
      intls[j].report.traces.push_back(std::move(t.trace));
      intls[j].rule = std::move(t.fit.rule);
    } else {
      TuneResult t = tune_intls(data, external, out.kernels[j], lambdas[j],
                                grids[j], options);
      intls[j].report = make_report(Method::IntLS, t.fit);
      intls[j].report.lambda = lambdas[j];
      intls[j].report.kappa_own = t.selected;
      intls[j].report.traces = sepl[j].report.traces;
      intls[j].report.traces.push_back(std::move(t.trace));
      intls[j].rule = std::move(t.fit.rule);
    }
  }
  if (wants(Method::IntLS)) out.fits[Method::IntLS] = intls;

  if (wants(Method::IntLF)) {
    std::array<MethodFit, 2> intlf;
    for (int j = 0; j < 2; ++j) {
      const double kappa_own = intls[j].report.kappa_own;
      TuneResult t = tune_intlf(pair.study(j + 1), pair.study(2 - j),
                                sepl[1 - j].rule, out.kernels[j], lambdas[j],
                                kappa_own, grids[j], options);
      intlf[j].report = make_report(Method::IntLF, t.fit);
      intlf[j].report.lambda = lambdas[j];
      intlf[j].report.kappa_own = kappa_own;
      intlf[j].report.kappa_cross = t.selected;
      intlf[j].report.traces = intls[j].report.traces;
      intlf[j].report.traces.push_back(std::move(t.trace));
      intlf[j].rule = std::move(t.fit.rule);
    }
    out.fits[Method::IntLF] = intlf;
  }
  return out;
}

}  // namespace itl
