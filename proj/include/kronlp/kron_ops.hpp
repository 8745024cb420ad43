#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kronlp/types.hpp"

// Factor-space linear algebra for Kronecker-product kernels.
//
// Conventions used everywhere in this library:
//   * vec() stacks columns; the pairwise kernel is K = K_S (x) K_D, so for an
//     N x M score matrix the drug factor acts on rows and the side-effect
//     factor acts on columns.
//   * Filter grids are N x M: drug-side eigenvalues index rows, side-effect
//     eigenvalues index columns.
// No operation here ever materializes an NM x NM matrix.

namespace kronlp {

inline constexpr double kEigenvalueDust = 1e-12;

// Symmetric eigendecomposition K = V diag(values) V^T, eigenvalues ascending.
template <typename ScalarT>
struct EigenSystem {
  MatrixX<ScalarT> vectors;
  VectorX<ScalarT> values;

  Index size() const { return values.size(); }
};

using EigenSystemd = EigenSystem<double>;

template <typename Derived>
EigenSystem<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& K) {
  using Scalar = typename Derived::Scalar;
  if (K.rows() != K.cols() || K.rows() < 1)
    throw std::invalid_argument("sym_eig: matrix must be square and nonempty");
  const Scalar scale = std::max<Scalar>(1, K.cwiseAbs().maxCoeff());
  if ((K.derived() - K.derived().transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10) * scale)
    throw std::invalid_argument("sym_eig: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(K.derived());
  if (solver.info() != Eigen::Success)
    throw NumericError("sym_eig: eigendecomposition did not converge");
  return {solver.eigenvectors(), solver.eigenvalues()};
}

// (K_S (x) K_D) vec(C) in matricized form: K_D * C * K_S^T.
template <typename DerivedS, typename DerivedD, typename DerivedC>
MatrixX<typename DerivedC::Scalar> kron_apply(const Eigen::MatrixBase<DerivedS>& K_S,
                                              const Eigen::MatrixBase<DerivedD>& K_D,
                                              const Eigen::MatrixBase<DerivedC>& C) {
  if (K_D.cols() != C.rows() || K_S.cols() != C.cols())
    throw std::invalid_argument("kron_apply: dimension mismatch");
  return K_D.derived() * C.derived() * K_S.derived().transpose();
}

// V_r (grid (.) (V_r^T R V_c)) V_c^T: applies a spectral filter expressed in
// the joint eigenbasis of the row and column factors.
template <typename ScalarT, typename DerivedG, typename DerivedR>
MatrixX<ScalarT> filter_solve(const EigenSystem<ScalarT>& row_eig,
                              const EigenSystem<ScalarT>& col_eig,
                              const Eigen::MatrixBase<DerivedG>& grid,
                              const Eigen::MatrixBase<DerivedR>& R) {
  if (grid.rows() != row_eig.size() || grid.cols() != col_eig.size())
    throw std::invalid_argument("filter_solve: grid dimension mismatch");
  if (R.rows() != row_eig.size() || R.cols() != col_eig.size())
    throw std::invalid_argument("filter_solve: operand dimension mismatch");
  MatrixX<ScalarT> coeff = row_eig.vectors.transpose() * R.derived() * col_eig.vectors;
  coeff.array() *= grid.derived().array();
  return row_eig.vectors * coeff * col_eig.vectors.transpose();
}

// Outer-product grid u(i,j) = rows.values[i] * cols.values[j]. With
// clamp_dust, eigenvalues below the dust threshold are treated as exact
// zeros (PSD kernels only carry negative dust after repair).
template <typename ScalarT>
MatrixX<ScalarT> eigenvalue_products(const EigenSystem<ScalarT>& rows,
                                     const EigenSystem<ScalarT>& cols,
                                     bool clamp_dust = true) {
  VectorX<ScalarT> r = rows.values;
  VectorX<ScalarT> c = cols.values;
  if (clamp_dust) {
    r = (r.array() < ScalarT(kEigenvalueDust)).select(ScalarT(0), r);
    c = (c.array() < ScalarT(kEigenvalueDust)).select(ScalarT(0), c);
  }
  return r * c.transpose();
}

// Kron-RLS shrinkage grid: u / (u + lambda), drug eigenvalues on rows.
template <typename ScalarT>
MatrixX<ScalarT> kronrls_filter(const EigenSystem<ScalarT>& drug_eig,
                                const EigenSystem<ScalarT>& side_eig,
                                ScalarT lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("kronrls_filter: lambda must be positive");
  MatrixX<ScalarT> u = eigenvalue_products(drug_eig, side_eig);
  return (u.array() / (u.array() + lambda)).matrix();
}

// Grid inverting (1+sigma) I - sigma A (x) B on the joint eigenbasis:
// entries 1 / (1 + sigma - sigma u). Row eigensystem is the drug-side
// affinity B, column eigensystem the side-effect affinity A.
template <typename ScalarT>
MatrixX<ScalarT> consensus_filter(const EigenSystem<ScalarT>& row_eig,
                                  const EigenSystem<ScalarT>& col_eig,
                                  ScalarT sigma) {
  if (sigma < 0) throw std::invalid_argument("consensus_filter: sigma must be nonnegative");
  MatrixX<ScalarT> u = eigenvalue_products(row_eig, col_eig, /*clamp_dust=*/false);
  MatrixX<ScalarT> denom = (ScalarT(1) + sigma - sigma * u.array()).matrix();
  if (denom.minCoeff() <= ScalarT(kEigenvalueDust))
    throw NumericError("consensus_filter: singular consensus system (affinity spectrum exceeds 1)");
  return denom.cwiseInverse();
}

// Degree-normalized affinity H^{-1/2} K H^{-1/2}, H = diag(row sums of K).
template <typename Derived>
MatrixX<typename Derived::Scalar> normalized_affinity(const Eigen::MatrixBase<Derived>& K) {
  using Scalar = typename Derived::Scalar;
  if (K.rows() != K.cols()) throw std::invalid_argument("normalized_affinity: matrix must be square");
  VectorX<Scalar> degree = K.derived().rowwise().sum();
  for (Index j = 0; j < degree.size(); ++j) {
    if (!(degree[j] > 0))
      throw NumericError("normalized_affinity: nonpositive degree at row " + std::to_string(j));
  }
  VectorX<Scalar> dinv = degree.array().rsqrt();
  MatrixX<Scalar> A = dinv.asDiagonal() * K.derived() * dinv.asDiagonal();
  return ((A + A.transpose()) / Scalar(2)).eval();
}

}  // namespace kronlp
