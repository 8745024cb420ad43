#pragma once

#include <cmath>
#include <vector>

#include "kronlp/kernels.hpp"
#include "kronlp/kron_ops.hpp"
#include "kronlp/types.hpp"

// Multi-view Kronecker RLS fusion. Each view v keeps its own dual a^v and
// partition K^v a^v; a consensus score matrix is fit to the weighted
// partition mixture under a graph-Laplacian smoothness penalty built from
// simplex-weighted combinations of the factor kernels. Fitting alternates
// closed-form/QP updates over (consensus, view weights, graph weights,
// duals); every pairwise-space solve runs in factor space.

namespace kronlp {

struct Hyperparams {
  double mu = std::pow(2.0, -7);
  double beta = 1.0;
  double sigma = std::pow(2.0, -8);
  double epsilon = 2.0;              // graph-weight exponent, must exceed 1
  std::vector<double> lambdas;       // per view; empty broadcasts 1.0, size 1 broadcasts
  int max_sweeps = 100;
  double rel_tol = 1e-6;

  void validate() const;
  std::vector<double> resolved_lambdas(Index n_views) const;
};

struct SweepRecord {
  int sweep = 0;
  // Objective at sweep end; the Laplacian term is evaluated with the
  // affinities that were in force during the sweep (frozen-H convention).
  double objective = 0.0;
  // Same frozen affinities, state as it stood when the sweep began.
  double objective_start = 0.0;
  Vector w;
  Vector theta_d;
  Vector theta_s;
};

struct FusionState {
  Matrix consensus;                     // N x M
  std::vector<Matrix> view_duals;       // V matrices, N x M
  std::vector<Matrix> view_partitions;  // V matrices, K^v a^v
  Vector w;                             // view weights, simplex
  Vector theta_d;                       // drug graph weights, simplex
  Vector theta_s;                       // side-effect graph weights, simplex
  Matrix affinity_d;                    // B, N x N
  Matrix affinity_s;                    // A, M x M
  Vector degree_d;                      // H_D diagonal for the current combination
  Vector degree_s;                      // H_S diagonal
  EigenSystemd eig_affinity_d;
  EigenSystemd eig_affinity_s;
  std::vector<double> lambdas;          // resolved per-view regularization
  std::vector<SweepRecord> trace;
  int sweeps = 0;
};

// Factor eigendecompositions, computed once per fit and shared by all views.
struct FactorEigens {
  std::vector<EigenSystemd> drug;
  std::vector<EigenSystemd> side;
};

FactorEigens compute_factor_eigens(const ViewCatalog& catalog);

// Full objective value; the Laplacian quadratic is evaluated with the
// state's current affinities and never materializes the NM x NM Laplacian.
double fusion_objective(const FusionState& state, const Matrix& F_train, const Hyperparams& hp);

// sigma/2 * (||C||_F^2 - trace(C^T B C A^T)) for given affinities.
double laplacian_penalty(const Matrix& consensus, const Matrix& affinity_d,
                         const Matrix& affinity_s, double sigma);

// Exact minimizer of the consensus subproblem given everything else.
void update_consensus(FusionState& state, const Hyperparams& hp);

// Simplex-QP update of the view weights.
void update_weights(FusionState& state, const Matrix& F_train, const Hyperparams& hp);

// Closed-form graph-weight updates; degree matrices stay frozen at their
// sweep-start values, affinities are rebuilt separately afterwards.
void update_theta_d(FusionState& state, const ViewCatalog& catalog, const Hyperparams& hp);
void update_theta_s(FusionState& state, const ViewCatalog& catalog, const Hyperparams& hp);

// Recombine the factor kernels under the current graph weights and refresh
// degrees, affinities, and their eigensystems.
void rebuild_affinities(FusionState& state, const ViewCatalog& catalog, const Hyperparams& hp);

// Gauss-Seidel dual update for one view; refreshes its partition.
void update_view_dual(FusionState& state, const ViewCatalog& catalog, const FactorEigens& eigens,
                      Index view, const Matrix& F_train, const Hyperparams& hp);

FusionState init_fusion(const ViewCatalog& catalog, const FactorEigens& eigens,
                        const Matrix& F_train, const Hyperparams& hp);

FusionState fit_fusion(const ViewCatalog& catalog, const Matrix& F_train, const Hyperparams& hp);

inline const Matrix& predict(const FusionState& state) { return state.consensus; }

}  // namespace kronlp
