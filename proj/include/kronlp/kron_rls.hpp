#pragma once

#include "kronlp/kernels.hpp"
#include "kronlp/kron_ops.hpp"
#include "kronlp/types.hpp"

// Single-view Kronecker regularized least squares. The NM x NM system
// (K_S (x) K_D + lambda I) vec(a) = vec(F) is solved entirely in factor
// space through the eigendecompositions of the two kernels.

namespace kronlp {

struct KronRlsModel {
  EigenSystemd eig_d;
  EigenSystemd eig_s;
  double lambda = 1.0;
  Matrix dual;        // matricized solution a, N x M
  Matrix prediction;  // K_D * dual * K_S, N x M
};

KronRlsModel fit_kron_rls(const EigenSystemd& eig_d, const EigenSystemd& eig_s,
                          const Matrix& F_train, double lambda);

KronRlsModel fit_kron_rls(const KernelMatrix& K_D, const KernelMatrix& K_S,
                          const Matrix& F_train, double lambda);

inline const Matrix& predict(const KronRlsModel& model) { return model.prediction; }

}  // namespace kronlp
