#include "kronlp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kronlp/kron_ops.hpp"

namespace kronlp {

namespace {

constexpr double kPi = std::numbers::pi;

void require_profiles(const Matrix& profiles) {
  if (profiles.rows() < 1 || profiles.cols() < 1)
    throw std::invalid_argument("kernel: profiles must be a nonempty matrix");
}

void require_binary(const Matrix& profiles) {
  for (Index i = 0; i < profiles.rows(); ++i)
    for (Index j = 0; j < profiles.cols(); ++j)
      if (profiles(i, j) != 0.0 && profiles(i, j) != 1.0)
        throw std::invalid_argument("kernel: profiles must be binary");
}

// Zero the rows/columns of degenerate profiles, then restore the unit
// diagonal. `degenerate` flags profiles carrying no similarity evidence.
void apply_degenerate_policy(Matrix& K, const std::vector<bool>& degenerate) {
  for (Index i = 0; i < K.rows(); ++i) {
    if (!degenerate[static_cast<std::size_t>(i)]) continue;
    K.row(i).setZero();
    K.col(i).setZero();
  }
  K.diagonal().setOnes();
}

Matrix normalized_gram(const Matrix& rows, std::vector<bool>& degenerate) {
  const Index n = rows.rows();
  Vector norms = rows.rowwise().norm();
  degenerate.assign(static_cast<std::size_t>(n), false);
  Matrix scaled = rows;
  for (Index i = 0; i < n; ++i) {
    if (norms[i] > 0)
      scaled.row(i) /= norms[i];
    else
      degenerate[static_cast<std::size_t>(i)] = true;
  }
  Matrix K = scaled * scaled.transpose();
  K = ((K + K.transpose()) / 2.0).cwiseMax(-1.0).cwiseMin(1.0);
  return K;
}

double entropy2(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
  return h;
}

}  // namespace

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::GIP: return "gip";
    case KernelKind::COS: return "cos";
    case KernelKind::Corr: return "corr";
    case KernelKind::NMI: return "nmi";
    case KernelKind::NTK: return "ntk";
  }
  return "unknown";
}

std::string to_string(KernelSpace space) {
  return space == KernelSpace::drug ? "drug" : "side_effect";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "gip") return KernelKind::GIP;
  if (name == "cos") return KernelKind::COS;
  if (name == "corr") return KernelKind::Corr;
  if (name == "nmi") return KernelKind::NMI;
  if (name == "ntk") return KernelKind::NTK;
  throw std::invalid_argument("unknown kernel kind: " + name +
                              " (expected gip|cos|corr|nmi|ntk)");
}

KernelMatrix gip_kernel(const Matrix& profiles, double gamma, KernelSpace space) {
  require_profiles(profiles);
  if (!(gamma > 0)) throw std::invalid_argument("gip_kernel: gamma must be positive");
  const Index n = profiles.rows();
  const Vector sq = profiles.rowwise().squaredNorm();
  Matrix dist2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
                 2.0 * (profiles * profiles.transpose());
  dist2 = dist2.cwiseMax(0.0);
  Matrix K = (-gamma * dist2.array()).exp().matrix();
  K = (K + K.transpose()) / 2.0;
  K.diagonal().setOnes();
  return {std::move(K), KernelKind::GIP, space};
}

KernelMatrix cos_kernel(const Matrix& profiles, KernelSpace space) {
  require_profiles(profiles);
  std::vector<bool> degenerate;
  Matrix K = normalized_gram(profiles, degenerate);
  apply_degenerate_policy(K, degenerate);
  return {std::move(K), KernelKind::COS, space};
}

KernelMatrix corr_kernel(const Matrix& profiles, KernelSpace space) {
  require_profiles(profiles);
  Matrix centered = profiles.colwise() - profiles.rowwise().mean();
  std::vector<bool> degenerate;
  Matrix K = normalized_gram(centered, degenerate);
  apply_degenerate_policy(K, degenerate);
  return {std::move(K), KernelKind::Corr, space};
}

KernelMatrix nmi_kernel(const Matrix& profiles, KernelSpace space) {
  require_profiles(profiles);
  require_binary(profiles);
  const Index n = profiles.rows();
  const double m = static_cast<double>(profiles.cols());
  const Vector ones = profiles.rowwise().sum();
  const Matrix joint11 = profiles * profiles.transpose();
  Vector entropy(n);
  for (Index i = 0; i < n; ++i) entropy[i] = entropy2(ones[i] / m);

  Matrix K = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) {
      if (entropy[i] <= 0.0 || entropy[j] <= 0.0) continue;
      const double n11 = joint11(i, j);
      const double n10 = ones[i] - n11;
      const double n01 = ones[j] - n11;
      const double n00 = m - ones[i] - ones[j] + n11;
      const double pi1 = ones[i] / m, pj1 = ones[j] / m;
      double mi = 0.0;
      auto add = [&](double count, double pa, double pb) {
        if (count <= 0.0) return;
        const double p = count / m;
        mi += p * std::log(p / (pa * pb));
      };
      add(n11, pi1, pj1);
      add(n10, pi1, 1.0 - pj1);
      add(n01, 1.0 - pi1, pj1);
      add(n00, 1.0 - pi1, 1.0 - pj1);
      const double value = std::clamp(mi / std::sqrt(entropy[i] * entropy[j]), 0.0, 1.0);
      K(i, j) = value;
      K(j, i) = value;
    }
  }
  K.diagonal().setOnes();
  return {std::move(K), KernelKind::NMI, space};
}

namespace {

// Arc-cosine moments for the rectifier: kappa0 drives gradient covariances,
// kappa1 the post-activation covariances. Inputs are cosines in [-1, 1].
Matrix kappa0(const Matrix& rho) {
  return ((kPi - rho.array().acos()) / kPi).matrix();
}

Matrix kappa1(const Matrix& rho) {
  return (((1.0 - rho.array().square()).max(0.0).sqrt() +
           rho.array() * (kPi - rho.array().acos())) /
          kPi)
      .matrix();
}

}  // namespace

KernelMatrix ntk_kernel(const Matrix& profiles, int depth, KernelSpace space) {
  require_profiles(profiles);
  if (depth < 1) throw std::invalid_argument("ntk_kernel: depth must be at least 1");
  std::vector<bool> degenerate;
  Matrix sigma = normalized_gram(profiles, degenerate);
  // Unit inputs have an exactly-unit self-cosine; rounding noise here would
  // be amplified by the square-root singularity of kappa1 at 1.
  sigma.diagonal().setOnes();
  Matrix theta = sigma;
  for (int layer = 0; layer < depth; ++layer) {
    const Matrix next = kappa1(sigma);
    theta = next + theta.cwiseProduct(kappa0(sigma));
    sigma = next;
  }
  Vector diag = theta.diagonal().cwiseMax(kEigenvalueDust);
  Vector dinv = diag.array().rsqrt();
  Matrix K = dinv.asDiagonal() * theta * dinv.asDiagonal();
  K = ((K + K.transpose()) / 2.0).cwiseMax(-1.0).cwiseMin(1.0);
  apply_degenerate_policy(K, degenerate);
  return {std::move(K), KernelKind::NTK, space};
}

KernelMatrix psd_repair(const KernelMatrix& K) {
  const EigenSystemd eig = sym_eig(K.values);
  if (eig.values.minCoeff() >= -1e-10) return K;
  const Vector clipped = eig.values.cwiseMax(0.0);
  Matrix repaired = eig.vectors * clipped.asDiagonal() * eig.vectors.transpose();
  repaired = (repaired + repaired.transpose()) / 2.0;
  return {std::move(repaired), K.kind, K.space};
}

KernelMatrix make_kernel(KernelKind kind, const Matrix& profiles, const KernelConfig& config,
                         KernelSpace space) {
  switch (kind) {
    case KernelKind::GIP: return gip_kernel(profiles, config.gip_gamma, space);
    case KernelKind::COS: return cos_kernel(profiles, space);
    case KernelKind::Corr: return corr_kernel(profiles, space);
    case KernelKind::NMI: return nmi_kernel(profiles, space);
    case KernelKind::NTK: return ntk_kernel(profiles, config.ntk_depth, space);
  }
  throw std::invalid_argument("make_kernel: unknown kind");
}

ViewCatalog build_catalog(const AdjacencyMatrix& train, const KernelConfig& config) {
  if (config.drug_kinds.empty() || config.side_kinds.empty())
    throw std::invalid_argument("build_catalog: kernel selection must be nonempty per space");
  train.validate();
  ViewCatalog catalog;
  const Matrix side_profiles = train.entries.transpose();
  for (KernelKind kind : config.drug_kinds)
    catalog.drug_kernels.push_back(
        psd_repair(make_kernel(kind, train.entries, config, KernelSpace::drug)));
  for (KernelKind kind : config.side_kinds)
    catalog.side_effect_kernels.push_back(
        psd_repair(make_kernel(kind, side_profiles, config, KernelSpace::side_effect)));
  for (int d = 0; d < static_cast<int>(catalog.drug_kernels.size()); ++d)
    for (int s = 0; s < static_cast<int>(catalog.side_effect_kernels.size()); ++s)
      catalog.views.emplace_back(d, s);
  return catalog;
}

}  // namespace kronlp
