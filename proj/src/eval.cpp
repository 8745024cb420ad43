#include "kronlp/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "kronlp/io.hpp"

namespace kronlp {

namespace {

struct ScoreGroup {
  double score = 0.0;
  std::int64_t pos = 0;
  std::int64_t neg = 0;
};

// Unique scores in descending order with per-group label counts.
std::vector<ScoreGroup> descending_groups(const ScoredPairs& pairs) {
  std::vector<std::size_t> order(pairs.scores.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pairs.scores[a] > pairs.scores[b]; });
  std::vector<ScoreGroup> groups;
  for (std::size_t k : order) {
    if (groups.empty() || pairs.scores[k] != groups.back().score)
      groups.push_back({pairs.scores[k], 0, 0});
    if (pairs.labels[k] != 0)
      ++groups.back().pos;
    else
      ++groups.back().neg;
  }
  return groups;
}

void require_pairs(const ScoredPairs& pairs) {
  if (pairs.scores.empty() || pairs.scores.size() != pairs.labels.size())
    throw std::invalid_argument("metrics: scores and labels must be nonempty and equal length");
}

std::pair<std::int64_t, std::int64_t> count_classes(const ScoredPairs& pairs) {
  std::int64_t pos = 0;
  for (int label : pairs.labels) pos += label != 0 ? 1 : 0;
  return {pos, static_cast<std::int64_t>(pairs.labels.size()) - pos};
}

double f_score_of(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

}  // namespace

double auc(const ScoredPairs& pairs) {
  require_pairs(pairs);
  const auto [n_pos, n_neg] = count_classes(pairs);
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("AUC undefined");
  std::int64_t concordant = 0;
  std::int64_t tied = 0;
  std::int64_t pos_above = 0;
  for (const ScoreGroup& g : descending_groups(pairs)) {
    concordant += pos_above * g.neg;
    tied += g.pos * g.neg;
    pos_above += g.pos;
  }
  return (static_cast<double>(concordant) + 0.5 * static_cast<double>(tied)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double aupr(const ScoredPairs& pairs) {
  require_pairs(pairs);
  const auto [n_pos, n_neg] = count_classes(pairs);
  (void)n_neg;
  if (n_pos == 0) throw std::invalid_argument("AUPR undefined: no positive pairs");
  double area = 0.0;
  double prev_recall = 0.0;
  std::int64_t tp = 0;
  std::int64_t seen = 0;
  for (const ScoreGroup& g : descending_groups(pairs)) {
    tp += g.pos;
    seen += g.pos + g.neg;
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return area;
}

std::vector<std::pair<double, double>> pr_curve(const ScoredPairs& pairs) {
  require_pairs(pairs);
  const auto [n_pos, n_neg] = count_classes(pairs);
  (void)n_neg;
  if (n_pos == 0) throw std::invalid_argument("PR curve undefined: no positive pairs");
  std::vector<std::pair<double, double>> points;
  std::int64_t tp = 0;
  std::int64_t seen = 0;
  for (const ScoreGroup& g : descending_groups(pairs)) {
    tp += g.pos;
    seen += g.pos + g.neg;
    points.emplace_back(static_cast<double>(tp) / static_cast<double>(n_pos),
                        static_cast<double>(tp) / static_cast<double>(seen));
  }
  return points;
}

Prf prf_at(const ScoredPairs& pairs, double threshold) {
  require_pairs(pairs);
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < pairs.scores.size(); ++k) {
    const bool predicted = pairs.scores[k] >= threshold;
    const bool actual = pairs.labels[k] != 0;
    if (predicted && actual) ++tp;
    if (predicted && !actual) ++fp;
    if (!predicted && actual) ++fn;
  }
  Prf out;
  out.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  out.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  out.f_score = f_score_of(out.precision, out.recall);
  return out;
}

ThresholdChoice best_threshold(const ScoredPairs& pairs) {
  require_pairs(pairs);
  const auto [n_pos, n_neg] = count_classes(pairs);
  (void)n_neg;
  if (n_pos == 0) throw std::invalid_argument("best_threshold: no positive pairs");
  const auto groups = descending_groups(pairs);
  const std::int64_t total = static_cast<std::int64_t>(pairs.scores.size());

  // F-score when the top `cut` groups are predicted positive; cut = 0 is the
  // +inf sentinel, cut = size is the -inf sentinel.
  std::vector<std::int64_t> tp_at(groups.size() + 1, 0);
  std::vector<std::int64_t> seen_at(groups.size() + 1, 0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    tp_at[g + 1] = tp_at[g] + groups[g].pos;
    seen_at[g + 1] = seen_at[g] + groups[g].pos + groups[g].neg;
  }
  auto f_at_cut = [&](std::size_t cut) {
    if (cut == 0) return 0.0;
    const double recall = static_cast<double>(tp_at[cut]) / static_cast<double>(n_pos);
    const double precision = static_cast<double>(tp_at[cut]) / static_cast<double>(seen_at[cut]);
    return f_score_of(precision, recall);
  };
  auto threshold_at_cut = [&](std::size_t cut) {
    if (cut == 0) return std::numeric_limits<double>::infinity();
    if (seen_at[cut] == total) return -std::numeric_limits<double>::infinity();
    return 0.5 * (groups[cut - 1].score + groups[cut].score);
  };

  // Scan from the -inf sentinel upward so ties resolve to the larger
  // threshold (ascending thresholds correspond to shrinking cuts).
  ThresholdChoice best{threshold_at_cut(groups.size()), f_at_cut(groups.size())};
  for (std::size_t cut = groups.size(); cut-- > 0;) {
    const double f = f_at_cut(cut);
    if (f >= best.f_score) best = {threshold_at_cut(cut), f};
  }
  return best;
}

ScoredPairs collect_masked_pairs(const Matrix& scores, const Matrix& truth, const Matrix& mask) {
  if (scores.rows() != truth.rows() || scores.cols() != truth.cols() ||
      mask.rows() != truth.rows() || mask.cols() != truth.cols())
    throw std::invalid_argument("collect_masked_pairs: dimension mismatch");
  ScoredPairs pairs;
  for (Index i = 0; i < truth.rows(); ++i) {
    for (Index j = 0; j < truth.cols(); ++j) {
      if (mask(i, j) == 0.0) continue;
      pairs.scores.push_back(scores(i, j));
      pairs.labels.push_back(truth(i, j) != 0.0 ? 1 : 0);
    }
  }
  return pairs;
}

CvResult cross_validate(const AdjacencyMatrix& F, const KernelConfig& kernel_config,
                        const Hyperparams& hp, const CvOptions& options,
                        const FoldSink& on_fold) {
  F.validate();
  hp.validate();
  if (options.n_repeats < 1) throw std::invalid_argument("cross_validate: need at least 1 repeat");
  const int n_tasks = options.n_repeats * options.n_folds;

  CvResult result;
  result.reports.resize(static_cast<std::size_t>(n_tasks));
  std::mutex sink_mutex;
  std::atomic<int> next_task{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const int task = next_task.fetch_add(1);
      if (task >= n_tasks) return;
      try {
        const int repeat = task / options.n_folds;
        const int fold = task % options.n_folds;
        const FoldAssignment folds =
            make_folds(F, options.n_folds, options.seed + static_cast<std::uint64_t>(repeat));
        const MaskedFold masked = mask_fold(F, folds, fold);
        const std::string fold_tag = "s" + std::to_string(options.seed) + "r" +
                                     std::to_string(repeat) + "f" + std::to_string(fold);
        const ViewCatalog catalog =
            options.cache_dir.empty()
                ? build_catalog(masked.train, kernel_config)
                : build_catalog_cached(masked.train, kernel_config, options.cache_dir, fold_tag);
        const FusionState state = fit_fusion(catalog, masked.train.entries, hp);
        const ScoredPairs pairs =
            collect_masked_pairs(state.consensus, F.entries, masked.test_mask);

        MetricsReport report;
        report.repeat_idx = repeat;
        report.fold_idx = fold;
        report.auc = auc(pairs);
        report.aupr = aupr(pairs);
        const ThresholdChoice choice = best_threshold(pairs);
        const Prf prf = prf_at(pairs, choice.threshold);
        report.threshold = choice.threshold;
        report.recall = prf.recall;
        report.precision = prf.precision;
        report.f_score = prf.f_score;
        const auto [n_pos, n_neg] = count_classes(pairs);
        report.n_pos = n_pos;
        report.n_neg = n_neg;
        result.reports[static_cast<std::size_t>(task)] = report;
        if (on_fold) {
          std::lock_guard<std::mutex> lock(sink_mutex);
          on_fold(report, state, pairs);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  auto accumulate = [&](auto field) {
    double mean = 0.0;
    for (const auto& r : result.reports) mean += field(r);
    mean /= static_cast<double>(n_tasks);
    double var = 0.0;
    for (const auto& r : result.reports) {
      const double d = field(r) - mean;
      var += d * d;
    }
    const double sd = n_tasks > 1 ? std::sqrt(var / static_cast<double>(n_tasks - 1)) : 0.0;
    return std::pair<double, double>{mean, sd};
  };
  std::tie(result.mean.aupr, result.stddev.aupr) =
      accumulate([](const MetricsReport& r) { return r.aupr; });
  std::tie(result.mean.auc, result.stddev.auc) =
      accumulate([](const MetricsReport& r) { return r.auc; });
  std::tie(result.mean.recall, result.stddev.recall) =
      accumulate([](const MetricsReport& r) { return r.recall; });
  std::tie(result.mean.precision, result.stddev.precision) =
      accumulate([](const MetricsReport& r) { return r.precision; });
  std::tie(result.mean.f_score, result.stddev.f_score) =
      accumulate([](const MetricsReport& r) { return r.f_score; });
  std::tie(result.mean.threshold, result.stddev.threshold) =
      accumulate([](const MetricsReport& r) { return r.threshold; });
  return result;
}

}  // namespace kronlp
