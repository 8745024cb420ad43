#include "kronlp/tuning.hpp"

#include <cmath>

#include "kronlp/eval.hpp"
#include "kronlp/kron_rls.hpp"

namespace kronlp {

std::vector<double> power_grid(int min_exp, int max_exp) {
  if (min_exp > max_exp) throw std::invalid_argument("power_grid: empty exponent range");
  std::vector<double> grid;
  for (int e = min_exp; e <= max_exp; ++e) grid.push_back(std::pow(2.0, e));
  return grid;
}

LambdaTuneResult tune_lambdas(const AdjacencyMatrix& F, const KernelConfig& kernel_config,
                              const std::vector<double>& lambda_grid, int n_folds,
                              std::uint64_t seed) {
  if (lambda_grid.empty()) throw std::invalid_argument("tune_lambdas: empty grid");
  const FoldAssignment folds = make_folds(F, n_folds, seed);
  LambdaTuneResult result;
  result.grid = lambda_grid;

  Matrix total;
  for (int fold = 0; fold < n_folds; ++fold) {
    const MaskedFold masked = mask_fold(F, folds, fold);
    const ViewCatalog catalog = build_catalog(masked.train, kernel_config);
    const FactorEigens eigens = compute_factor_eigens(catalog);
    if (total.size() == 0)
      total = Matrix::Zero(catalog.n_views(), static_cast<Index>(lambda_grid.size()));
    for (Index v = 0; v < catalog.n_views(); ++v) {
      const auto [d_idx, s_idx] = catalog.views[static_cast<std::size_t>(v)];
      for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
        const KronRlsModel model =
            fit_kron_rls(eigens.drug[static_cast<std::size_t>(d_idx)],
                         eigens.side[static_cast<std::size_t>(s_idx)],
                         masked.train.entries, lambda_grid[g]);
        const ScoredPairs pairs =
            collect_masked_pairs(model.prediction, F.entries, masked.test_mask);
        total(v, static_cast<Index>(g)) += aupr(pairs);
      }
    }
  }
  result.mean_aupr = total / static_cast<double>(n_folds);
  for (Index v = 0; v < result.mean_aupr.rows(); ++v) {
    Index best = 0;
    result.mean_aupr.row(v).maxCoeff(&best);
    result.lambdas.push_back(lambda_grid[static_cast<std::size_t>(best)]);
  }
  return result;
}

FusionTuneResult tune_fusion(const AdjacencyMatrix& F, const KernelConfig& kernel_config,
                             const Hyperparams& base, const std::vector<double>& grid,
                             int n_folds, std::uint64_t seed, int jobs) {
  if (grid.empty()) throw std::invalid_argument("tune_fusion: empty grid");
  FusionTuneResult result;
  result.best.mean_aupr = -1.0;
  CvOptions options;
  options.n_folds = n_folds;
  options.n_repeats = 1;
  options.seed = seed;
  options.jobs = jobs;
  for (double mu : grid) {
    for (double beta : grid) {
      for (double sigma : grid) {
        Hyperparams hp = base;
        hp.mu = mu;
        hp.beta = beta;
        hp.sigma = sigma;
        const CvResult cv = cross_validate(F, kernel_config, hp, options);
        const FusionTunePoint point{mu, beta, sigma, cv.mean.aupr};
        result.leaderboard.push_back(point);
        if (point.mean_aupr > result.best.mean_aupr) result.best = point;
      }
    }
  }
  return result;
}

}  // namespace kronlp
