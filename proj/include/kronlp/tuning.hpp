#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "kronlp/dataset.hpp"
#include "kronlp/fusion.hpp"
#include "kronlp/kernels.hpp"

// Two-stage hyperparameter search: per-view lambda by single-view Kron-RLS
// validation AUPR first, then (mu, beta, sigma) on the full fusion model
// with the lambdas held fixed.

namespace kronlp {

std::vector<double> power_grid(int min_exp, int max_exp);

struct LambdaTuneResult {
  std::vector<double> lambdas;  // best per view
  Matrix mean_aupr;             // V x grid.size()
  std::vector<double> grid;
};

LambdaTuneResult tune_lambdas(const AdjacencyMatrix& F, const KernelConfig& kernel_config,
                              const std::vector<double>& lambda_grid, int n_folds,
                              std::uint64_t seed);

struct FusionTunePoint {
  double mu = 0.0;
  double beta = 0.0;
  double sigma = 0.0;
  double mean_aupr = 0.0;
};

struct FusionTuneResult {
  FusionTunePoint best;
  std::vector<FusionTunePoint> leaderboard;  // scanned order
};

FusionTuneResult tune_fusion(const AdjacencyMatrix& F, const KernelConfig& kernel_config,
                             const Hyperparams& base, const std::vector<double>& grid,
                             int n_folds, std::uint64_t seed, int jobs);

}  // namespace kronlp
