#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kronlp/dataset.hpp"
#include "kronlp/types.hpp"

// Similarity kernels over interaction profiles (rows/columns of the training
// adjacency matrix). All constructions are symmetric with unit diagonal;
// degenerate profiles (no information to compare) get zero off-diagonal
// similarity and a unit diagonal.

namespace kronlp {

enum class KernelKind { GIP, COS, Corr, NMI, NTK };
enum class KernelSpace { drug, side_effect };

std::string to_string(KernelKind kind);
std::string to_string(KernelSpace space);
KernelKind kernel_kind_from_string(const std::string& name);

struct KernelMatrix {
  Matrix values;
  KernelKind kind = KernelKind::GIP;
  KernelSpace space = KernelSpace::drug;

  Index size() const { return values.rows(); }
};

struct KernelConfig {
  std::vector<KernelKind> drug_kinds{KernelKind::GIP, KernelKind::COS, KernelKind::Corr,
                                     KernelKind::NMI, KernelKind::NTK};
  std::vector<KernelKind> side_kinds{KernelKind::GIP, KernelKind::COS, KernelKind::Corr,
                                     KernelKind::NMI, KernelKind::NTK};
  double gip_gamma = 1.0;
  int ntk_depth = 2;
};

// Pairwise-kernel view set: views enumerate the full P x Q cross product in
// row-major order, drug kernel index varying slowest.
struct ViewCatalog {
  std::vector<KernelMatrix> drug_kernels;
  std::vector<KernelMatrix> side_effect_kernels;
  std::vector<std::pair<int, int>> views;  // (drug index, side-effect index)

  Index n_views() const { return static_cast<Index>(views.size()); }
};

// Gaussian interaction profile kernel exp(-gamma ||x_i - x_j||^2).
KernelMatrix gip_kernel(const Matrix& profiles, double gamma = 1.0,
                        KernelSpace space = KernelSpace::drug);

KernelMatrix cos_kernel(const Matrix& profiles, KernelSpace space = KernelSpace::drug);

KernelMatrix corr_kernel(const Matrix& profiles, KernelSpace space = KernelSpace::drug);

// Mutual information between binary profiles normalized by the geometric
// mean of their entropies; natural log throughout.
KernelMatrix nmi_kernel(const Matrix& profiles, KernelSpace space = KernelSpace::drug);

// Infinite-width neural tangent kernel of a depth-`depth` fully connected
// rectifier network via the arc-cosine recursion; inputs are normalized to
// the unit sphere first and the result is rescaled to unit diagonal.
KernelMatrix ntk_kernel(const Matrix& profiles, int depth = 2,
                        KernelSpace space = KernelSpace::drug);

// Clip negative eigenvalues to zero; returns the input unchanged when it is
// already positive semi-definite (smallest eigenvalue >= -1e-10).
KernelMatrix psd_repair(const KernelMatrix& K);

KernelMatrix make_kernel(KernelKind kind, const Matrix& profiles, const KernelConfig& config,
                         KernelSpace space);

// Kernels from the masked training matrix only: drug kernels from its rows,
// side-effect kernels from its columns, all PSD-repaired.
ViewCatalog build_catalog(const AdjacencyMatrix& train, const KernelConfig& config);

}  // namespace kronlp
