#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kronlp/types.hpp"

namespace kronlp {

enum class EdgeFormat { tsv_edges, dense_csv };

// Binary drug-by-side-effect link matrix with stable identifier ordering.
struct AdjacencyMatrix {
  Matrix entries;  // N x M, every entry exactly 0 or 1
  std::vector<std::string> drug_ids;
  std::vector<std::string> side_effect_ids;

  Index n_drugs() const { return entries.rows(); }
  Index n_side_effects() const { return entries.cols(); }

  // Throws std::invalid_argument when an invariant is broken: non-binary
  // entries, fewer than two nodes on either side, duplicate identifiers.
  void validate() const;
};

struct DatasetStats {
  Index n_drugs = 0;
  Index n_side_effects = 0;
  std::int64_t n_associations = 0;
  double sparsity = 0.0;  // 1 - associations / (N*M)
};

// Partition of all N*M pairs into folds; sizes differ by at most one.
struct FoldAssignment {
  int n_folds = 0;
  IntMatrix assignment;  // N x M, values in [0, n_folds)
};

struct MaskedFold {
  AdjacencyMatrix train;  // test-fold entries zeroed, positives included
  Matrix test_mask;       // 1 at test-fold positions
};

AdjacencyMatrix load_edge_list(const std::string& path, EdgeFormat format);

DatasetStats stats(const AdjacencyMatrix& F);

FoldAssignment make_folds(const AdjacencyMatrix& F, int n_folds, std::uint64_t seed);

MaskedFold mask_fold(const AdjacencyMatrix& F, const FoldAssignment& folds, int test_fold);

// Nonnegative rank-`rank` score matrix used by synthesize(); exposed so the
// low-rank structure can be checked before thresholding.
Matrix synthesize_scores(Index n, Index m, Index rank, std::uint64_t seed);

// Binary network with round(density * n * m) links, placed at the largest
// entries of a random low-rank score matrix.
AdjacencyMatrix synthesize(Index n, Index m, Index rank, double density, std::uint64_t seed);

}  // namespace kronlp
