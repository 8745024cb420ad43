#include "kronlp/kron_rls.hpp"

namespace kronlp {

KronRlsModel fit_kron_rls(const EigenSystemd& eig_d, const EigenSystemd& eig_s,
                          const Matrix& F_train, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("fit_kron_rls: lambda must be positive");
  if (eig_d.size() != F_train.rows() || eig_s.size() != F_train.cols())
    throw std::invalid_argument("fit_kron_rls: kernel sizes do not match the training matrix");
  KronRlsModel model;
  model.eig_d = eig_d;
  model.eig_s = eig_s;
  model.lambda = lambda;
  const Matrix u = eigenvalue_products(eig_d, eig_s);
  const Matrix coeff = eig_d.vectors.transpose() * F_train * eig_s.vectors;
  const Matrix shrink = (u.array() / (u.array() + lambda)).matrix();
  const Matrix invgrid = (u.array() + lambda).inverse().matrix();
  model.prediction =
      eig_d.vectors * shrink.cwiseProduct(coeff) * eig_s.vectors.transpose();
  model.dual = eig_d.vectors * invgrid.cwiseProduct(coeff) * eig_s.vectors.transpose();
  return model;
}

KronRlsModel fit_kron_rls(const KernelMatrix& K_D, const KernelMatrix& K_S,
                          const Matrix& F_train, double lambda) {
  return fit_kron_rls(sym_eig(K_D.values), sym_eig(K_S.values), F_train, lambda);
}

}  // namespace kronlp
