#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kronlp/dataset.hpp"
#include "kronlp/eval.hpp"
#include "kronlp/fusion.hpp"
#include "kronlp/kernels.hpp"
#include "kronlp/kron_rls.hpp"
#include "kronlp/types.hpp"

namespace kronlp {

// Dense CSV: one row per line, comma-separated, full double precision.
void write_matrix_csv(const std::string& path, const Matrix& M);
Matrix read_matrix_csv(const std::string& path);

// Raw binary: two little-endian 64-bit dimension fields (rows, cols)
// followed by rows*cols little-endian doubles in row-major order.
void write_matrix_f64(const std::string& path, const Matrix& M);
Matrix read_matrix_f64(const std::string& path);

// FNV-1a over the dimensions and entries; keys the kernel cache.
std::string dataset_hash(const AdjacencyMatrix& F);

// FNV-1a over a real matrix's dimensions and raw entry bits.
std::string matrix_hash(const Matrix& M);

std::string kernel_cache_path(const std::string& dir, const std::string& hash,
                              const std::string& fold_tag, KernelKind kind, KernelSpace space);
std::optional<Matrix> load_cached_kernel(const std::string& path);
void store_cached_kernel(const std::string& path, const Matrix& values);

// Kernel-selection aware catalog build that round-trips kernels through the
// on-disk cache when a directory is given.
ViewCatalog build_catalog_cached(const AdjacencyMatrix& train, const KernelConfig& config,
                                 const std::string& cache_dir, const std::string& fold_tag);

// Single-view model dump: the dual matrix in the raw f64 format plus lambda
// and the factor-kernel provenance hashes in a JSON sidecar.
struct KronRlsDump {
  Matrix dual;
  double lambda = 0.0;
  std::string drug_kernel_hash;
  std::string side_kernel_hash;
};
void write_kron_rls_dump(const std::string& dir, const KronRlsModel& model,
                         const std::string& drug_kernel_hash,
                         const std::string& side_kernel_hash);
KronRlsDump read_kron_rls_dump(const std::string& dir);

void write_report_txt(const std::string& path, const CvResult& result);
void write_fold_reports_tsv(const std::string& path, const std::vector<MetricsReport>& reports);
void write_summary_json(const std::string& path, const CvResult& result);
void write_pr_curve_tsv(const std::string& path, const ScoredPairs& pairs);

// Fit trace: one line per sweep with objective and the simplex weights.
void write_fit_trace(const std::string& path, const FusionState& state);

void ensure_directory(const std::string& path);

}  // namespace kronlp
