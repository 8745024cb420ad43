#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kronlp/dataset.hpp"
#include "kronlp/fusion.hpp"
#include "kronlp/kernels.hpp"
#include "kronlp/types.hpp"

// Ranking metrics for imbalanced link prediction and the repeated masked
// cross-validation harness.

namespace kronlp {

struct ScoredPairs {
  std::vector<double> scores;
  std::vector<int> labels;  // 0 or 1
};

struct Prf {
  double recall = 0.0;
  double precision = 0.0;
  double f_score = 0.0;
};

struct ThresholdChoice {
  double threshold = 0.0;
  double f_score = 0.0;
};

struct MetricsReport {
  double aupr = 0.0;
  double auc = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f_score = 0.0;
  double threshold = 0.0;
  std::int64_t n_pos = 0;
  std::int64_t n_neg = 0;
  int repeat_idx = 0;
  int fold_idx = 0;
};

struct MetricsSummary {
  double aupr = 0.0;
  double auc = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f_score = 0.0;
  double threshold = 0.0;
};

struct CvResult {
  std::vector<MetricsReport> reports;  // repeat-major order
  MetricsSummary mean;
  MetricsSummary stddev;  // sample (n-1) standard deviation
};

struct CvOptions {
  int n_folds = 5;
  int n_repeats = 1;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string cache_dir;  // nonempty: kernels round-trip through the on-disk cache
};

// Probability that a random positive outranks a random negative, ties count
// half. Exact rational arithmetic on pair counts.
double auc(const ScoredPairs& pairs);

// Area under the stepwise precision-recall curve (average precision), tie
// groups entering together.
double aupr(const ScoredPairs& pairs);

// Threshold rule is score >= threshold.
Prf prf_at(const ScoredPairs& pairs, double threshold);

// Scans midpoints between consecutive unique scores plus +/-inf sentinels;
// ties broken toward the larger threshold.
ThresholdChoice best_threshold(const ScoredPairs& pairs);

// Stepwise PR curve points (recall, precision), one per unique score.
std::vector<std::pair<double, double>> pr_curve(const ScoredPairs& pairs);

// Test-fold scores and labels collected in row-major scan order.
ScoredPairs collect_masked_pairs(const Matrix& scores, const Matrix& truth, const Matrix& mask);

// Called once per finished fold, serialized across workers.
using FoldSink =
    std::function<void(const MetricsReport&, const FusionState&, const ScoredPairs&)>;

CvResult cross_validate(const AdjacencyMatrix& F, const KernelConfig& kernel_config,
                        const Hyperparams& hp, const CvOptions& options,
                        const FoldSink& on_fold = nullptr);

}  // namespace kronlp
