#include "kronlp/fusion.hpp"

#include <cmath>
#include <iostream>
#include <string>

#include "kronlp/kron_rls.hpp"
#include "kronlp/simplex_qp.hpp"

namespace kronlp {

namespace {

constexpr double kTraceClamp = 1e-12;

void check_state_shapes(const FusionState& state, const Matrix& F_train) {
  if (state.consensus.rows() != F_train.rows() || state.consensus.cols() != F_train.cols())
    throw std::invalid_argument("fusion: state does not match training matrix dimensions");
}

Matrix weighted_partition_sum(const FusionState& state, Index skip = -1) {
  const Matrix& first = state.view_partitions.front();
  Matrix sum = Matrix::Zero(first.rows(), first.cols());
  for (Index v = 0; v < state.w.size(); ++v) {
    if (v == skip) continue;
    sum.noalias() += state.w[v] * state.view_partitions[static_cast<std::size_t>(v)];
  }
  return sum;
}

// Simplex weights from smoothness traces: theta_i ~ t_i^{1/(1-epsilon)}.
Vector theta_from_traces(Vector traces, double epsilon) {
  if ((traces.array() <= 0.0).all())
    throw NumericError("fusion: Laplacian smoothness degenerate (all graph traces nonpositive)");
  traces = traces.cwiseMax(kTraceClamp);
  const double exponent = 1.0 / (1.0 - epsilon);
  Vector theta = traces.array().pow(exponent);
  return theta / theta.sum();
}

// Frozen-degree normalization of one factor kernel.
Matrix frozen_affinity(const Matrix& K, const Vector& degree) {
  const Vector dinv = degree.array().rsqrt();
  return dinv.asDiagonal() * K * dinv.asDiagonal();
}

Matrix combine_kernels(const std::vector<KernelMatrix>& kernels, const Vector& theta,
                       double epsilon) {
  Matrix combined = Matrix::Zero(kernels.front().size(), kernels.front().size());
  for (Index i = 0; i < theta.size(); ++i)
    combined.noalias() +=
        std::pow(theta[i], epsilon) * kernels[static_cast<std::size_t>(i)].values;
  return combined;
}

}  // namespace

void Hyperparams::validate() const {
  if (!(mu > 0)) throw std::invalid_argument("hyperparams: mu must be positive");
  if (!(beta > 0)) throw std::invalid_argument("hyperparams: beta must be positive");
  if (sigma < 0) throw std::invalid_argument("hyperparams: sigma must be nonnegative");
  if (!(epsilon > 1)) throw std::invalid_argument("hyperparams: epsilon must exceed 1");
  if (max_sweeps < 0) throw std::invalid_argument("hyperparams: max_sweeps must be nonnegative");
  if (!(rel_tol > 0)) throw std::invalid_argument("hyperparams: rel_tol must be positive");
  for (double lambda : lambdas)
    if (!(lambda > 0)) throw std::invalid_argument("hyperparams: every lambda must be positive");
}

std::vector<double> Hyperparams::resolved_lambdas(Index n_views) const {
  if (lambdas.empty()) return std::vector<double>(static_cast<std::size_t>(n_views), 1.0);
  if (lambdas.size() == 1)
    return std::vector<double>(static_cast<std::size_t>(n_views), lambdas.front());
  if (static_cast<Index>(lambdas.size()) != n_views)
    throw std::invalid_argument("hyperparams: lambda count does not match view count");
  return lambdas;
}

FactorEigens compute_factor_eigens(const ViewCatalog& catalog) {
  FactorEigens eigens;
  eigens.drug.reserve(catalog.drug_kernels.size());
  eigens.side.reserve(catalog.side_effect_kernels.size());
  for (const auto& K : catalog.drug_kernels) eigens.drug.push_back(sym_eig(K.values));
  for (const auto& K : catalog.side_effect_kernels) eigens.side.push_back(sym_eig(K.values));
  return eigens;
}

double laplacian_penalty(const Matrix& consensus, const Matrix& affinity_d,
                         const Matrix& affinity_s, double sigma) {
  if (sigma == 0.0) return 0.0;
  const double smooth = ((affinity_d * consensus).cwiseProduct(consensus * affinity_s)).sum();
  return 0.5 * sigma * (consensus.squaredNorm() - smooth);
}

double fusion_objective(const FusionState& state, const Matrix& F_train, const Hyperparams& hp) {
  check_state_shapes(state, F_train);
  const Index V = state.w.size();
  double value = 0.5 * (state.consensus - weighted_partition_sum(state)).squaredNorm();
  for (Index v = 0; v < V; ++v) {
    const auto& partition = state.view_partitions[static_cast<std::size_t>(v)];
    const auto& dual = state.view_duals[static_cast<std::size_t>(v)];
    value += hp.mu * (0.5 * state.w[v] * (F_train - partition).squaredNorm() +
                      0.5 * state.lambdas[static_cast<std::size_t>(v)] *
                          dual.cwiseProduct(partition).sum());
  }
  value += 0.5 * hp.beta * state.w.squaredNorm();
  value += laplacian_penalty(state.consensus, state.affinity_d, state.affinity_s, hp.sigma);
  return value;
}

void update_consensus(FusionState& state, const Hyperparams& hp) {
  const Matrix mix = weighted_partition_sum(state);
  const Matrix grid = consensus_filter(state.eig_affinity_d, state.eig_affinity_s, hp.sigma);
  state.consensus = filter_solve(state.eig_affinity_d, state.eig_affinity_s, grid, mix);
}

void update_weights(FusionState& state, const Matrix& F_train, const Hyperparams& hp) {
  const Index V = state.w.size();
  if (V == 1) {
    state.w[0] = 1.0;
    return;
  }
  SimplexQp qp;
  qp.G.resize(V, V);
  qp.h.resize(V);
  for (Index i = 0; i < V; ++i) {
    const auto& pi = state.view_partitions[static_cast<std::size_t>(i)];
    for (Index j = 0; j <= i; ++j) {
      const double g = 0.5 * pi.cwiseProduct(state.view_partitions[static_cast<std::size_t>(j)]).sum();
      qp.G(i, j) = g;
      qp.G(j, i) = g;
    }
    qp.G(i, i) += 0.5 * hp.beta;
    qp.h[i] = state.consensus.cwiseProduct(pi).sum() -
              0.5 * hp.mu * (F_train - pi).squaredNorm();
  }
  // Solve in a normalized scale so the KKT tolerance is meaningful for
  // arbitrarily large partition inner products; the minimizer is unchanged.
  const double scale = std::max(1.0, std::max(qp.G.cwiseAbs().maxCoeff(), qp.h.cwiseAbs().maxCoeff()));
  qp.G /= scale;
  qp.h /= scale;
  state.w = solve_simplex_qp(qp, state.w);
}

void update_theta_d(FusionState& state, const ViewCatalog& catalog, const Hyperparams& hp) {
  const Index P = static_cast<Index>(catalog.drug_kernels.size());
  if (P == 1) {
    state.theta_d = Vector::Ones(1);
    return;
  }
  const Matrix right = state.consensus * state.affinity_s;  // F-hat A^T, A symmetric
  Vector traces(P);
  for (Index i = 0; i < P; ++i) {
    const Matrix Bi =
        frozen_affinity(catalog.drug_kernels[static_cast<std::size_t>(i)].values, state.degree_d);
    traces[i] = (Bi * state.consensus).cwiseProduct(right).sum();
  }
  state.theta_d = theta_from_traces(traces, hp.epsilon);
}

void update_theta_s(FusionState& state, const ViewCatalog& catalog, const Hyperparams& hp) {
  const Index Q = static_cast<Index>(catalog.side_effect_kernels.size());
  if (Q == 1) {
    state.theta_s = Vector::Ones(1);
    return;
  }
  // Drug-side combination uses the freshly updated theta_d under the frozen
  // sweep-start degrees.
  const Matrix combined_d = combine_kernels(catalog.drug_kernels, state.theta_d, hp.epsilon);
  const Matrix left = frozen_affinity(combined_d, state.degree_d) * state.consensus;
  Vector traces(Q);
  for (Index j = 0; j < Q; ++j) {
    const Matrix Aj = frozen_affinity(
        catalog.side_effect_kernels[static_cast<std::size_t>(j)].values, state.degree_s);
    traces[j] = left.cwiseProduct(state.consensus * Aj).sum();
  }
  state.theta_s = theta_from_traces(traces, hp.epsilon);
}

void rebuild_affinities(FusionState& state, const ViewCatalog& catalog, const Hyperparams& hp) {
  const Matrix combined_d = combine_kernels(catalog.drug_kernels, state.theta_d, hp.epsilon);
  const Matrix combined_s = combine_kernels(catalog.side_effect_kernels, state.theta_s, hp.epsilon);
  state.degree_d = combined_d.rowwise().sum();
  state.degree_s = combined_s.rowwise().sum();
  state.affinity_d = normalized_affinity(combined_d);
  state.affinity_s = normalized_affinity(combined_s);
  state.eig_affinity_d = sym_eig(state.affinity_d);
  state.eig_affinity_s = sym_eig(state.affinity_s);
}

void update_view_dual(FusionState& state, const ViewCatalog& catalog, const FactorEigens& eigens,
                      Index view, const Matrix& F_train, const Hyperparams& hp) {
  const auto [d_idx, s_idx] = catalog.views[static_cast<std::size_t>(view)];
  const EigenSystemd& eig_d = eigens.drug[static_cast<std::size_t>(d_idx)];
  const EigenSystemd& eig_s = eigens.side[static_cast<std::size_t>(s_idx)];
  const double wv = state.w[view];
  const double scale = 1.0 + hp.mu * wv;
  const double lambda_eff = state.lambdas[static_cast<std::size_t>(view)] / scale;

  const Matrix target =
      state.consensus - weighted_partition_sum(state, view) + hp.mu * wv * F_train;
  const Matrix u = eigenvalue_products(eig_d, eig_s);
  const Matrix grid = ((u.array() + lambda_eff).inverse() / scale).matrix();
  state.view_duals[static_cast<std::size_t>(view)] = filter_solve(eig_d, eig_s, grid, target);
  state.view_partitions[static_cast<std::size_t>(view)] =
      kron_apply(catalog.side_effect_kernels[static_cast<std::size_t>(s_idx)].values,
                 catalog.drug_kernels[static_cast<std::size_t>(d_idx)].values,
                 state.view_duals[static_cast<std::size_t>(view)]);
}

FusionState init_fusion(const ViewCatalog& catalog, const FactorEigens& eigens,
                        const Matrix& F_train, const Hyperparams& hp) {
  hp.validate();
  const Index V = catalog.n_views();
  if (V == 0) throw std::invalid_argument("fusion: catalog has no views");
  const Index P = static_cast<Index>(catalog.drug_kernels.size());
  const Index Q = static_cast<Index>(catalog.side_effect_kernels.size());
  for (const auto& K : catalog.drug_kernels)
    if (K.size() != F_train.rows())
      throw std::invalid_argument("fusion: drug kernel size does not match training matrix");
  for (const auto& K : catalog.side_effect_kernels)
    if (K.size() != F_train.cols())
      throw std::invalid_argument("fusion: side-effect kernel size does not match training matrix");

  FusionState state;
  state.lambdas = hp.resolved_lambdas(V);
  state.w = Vector::Constant(V, 1.0 / static_cast<double>(V));
  state.theta_d = Vector::Constant(P, 1.0 / static_cast<double>(P));
  state.theta_s = Vector::Constant(Q, 1.0 / static_cast<double>(Q));
  state.view_duals.resize(static_cast<std::size_t>(V));
  state.view_partitions.resize(static_cast<std::size_t>(V));
  for (Index v = 0; v < V; ++v) {
    const auto [d_idx, s_idx] = catalog.views[static_cast<std::size_t>(v)];
    const KronRlsModel model =
        fit_kron_rls(eigens.drug[static_cast<std::size_t>(d_idx)],
                     eigens.side[static_cast<std::size_t>(s_idx)], F_train,
                     state.lambdas[static_cast<std::size_t>(v)]);
    state.view_duals[static_cast<std::size_t>(v)] = model.dual;
    state.view_partitions[static_cast<std::size_t>(v)] =
        kron_apply(catalog.side_effect_kernels[static_cast<std::size_t>(s_idx)].values,
                   catalog.drug_kernels[static_cast<std::size_t>(d_idx)].values, model.dual);
  }
  rebuild_affinities(state, catalog, hp);
  update_consensus(state, hp);
  return state;
}

FusionState fit_fusion(const ViewCatalog& catalog, const Matrix& F_train, const Hyperparams& hp) {
  const FactorEigens eigens = compute_factor_eigens(catalog);
  FusionState state = init_fusion(catalog, eigens, F_train, hp);
  const Index V = catalog.n_views();

  double prev = fusion_objective(state, F_train, hp);
  state.trace.push_back({0, prev, prev, state.w, state.theta_d, state.theta_s});

  bool tiny_weights = false;
  for (int sweep = 1; sweep <= hp.max_sweeps; ++sweep) {
    const double obj_start = fusion_objective(state, F_train, hp);
    update_consensus(state, hp);
    const double lap_frozen =
        laplacian_penalty(state.consensus, state.affinity_d, state.affinity_s, hp.sigma);
    update_weights(state, F_train, hp);
    update_theta_d(state, catalog, hp);
    update_theta_s(state, catalog, hp);
    rebuild_affinities(state, catalog, hp);
    for (Index v = 0; v < V; ++v) update_view_dual(state, catalog, eigens, v, F_train, hp);

    const double obj_end =
        fusion_objective(state, F_train, hp) -
        laplacian_penalty(state.consensus, state.affinity_d, state.affinity_s, hp.sigma) +
        lap_frozen;
    if (!std::isfinite(obj_end))
      throw NumericError("fusion: non-finite objective at sweep " + std::to_string(sweep));
    state.trace.push_back({sweep, obj_end, obj_start, state.w, state.theta_d, state.theta_s});
    state.sweeps = sweep;
    tiny_weights = tiny_weights || (state.w.array() < 1e-6).any();

    const double rel = std::abs(obj_end - prev) / std::max(1.0, std::abs(prev));
    prev = obj_end;
    if (rel < hp.rel_tol) break;
  }
  if (tiny_weights)
    std::cerr << "fusion: some view weights fell below 1e-6; those views are driven almost "
                 "entirely by the consensus term\n";
  return state;
}

}  // namespace kronlp
