#include "kronlp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace kronlp {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.push_back("");
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

void check_no_duplicates(const std::vector<std::string>& ids, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second)
      throw std::invalid_argument(std::string("duplicate ") + what + " identifier: " + id);
  }
}

AdjacencyMatrix load_tsv_edges(std::istream& in) {
  std::unordered_map<std::string, Index> drug_index, side_index;
  std::vector<std::string> drug_ids, side_ids;
  std::vector<std::pair<Index, Index>> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
      throw IoError("malformed edge at line " + std::to_string(line_no) +
                    ": expected drug_id<TAB>side_effect_id");
    auto intern = [](std::unordered_map<std::string, Index>& idx, std::vector<std::string>& ids,
                     const std::string& key) {
      auto [it, inserted] = idx.try_emplace(key, static_cast<Index>(ids.size()));
      if (inserted) ids.push_back(key);
      return it->second;
    };
    edges.emplace_back(intern(drug_index, drug_ids, fields[0]),
                       intern(side_index, side_ids, fields[1]));
  }
  if (edges.empty()) throw IoError("no edges");
  AdjacencyMatrix F;
  F.entries = Matrix::Zero(static_cast<Index>(drug_ids.size()), static_cast<Index>(side_ids.size()));
  for (const auto& [i, j] : edges) F.entries(i, j) = 1.0;  // duplicates are idempotent
  F.drug_ids = std::move(drug_ids);
  F.side_effect_ids = std::move(side_ids);
  return F;
}

AdjacencyMatrix load_dense_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("no edges");
  line = strip_cr(line);
  auto header = split(line, ',');
  if (!header.empty() && header.front().empty()) header.erase(header.begin());
  if (header.empty()) throw IoError("malformed header at line 1: no side-effect ids");
  const Index m = static_cast<Index>(header.size());

  std::vector<std::string> drug_ids;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (static_cast<Index>(fields.size()) != m + 1)
      throw IoError("malformed row at line " + std::to_string(line_no) + ": expected " +
                    std::to_string(m + 1) + " fields, got " + std::to_string(fields.size()));
    drug_ids.push_back(fields[0]);
    std::vector<double> row(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) {
      const std::string& cell = fields[static_cast<std::size_t>(j + 1)];
      char* end = nullptr;
      const double value = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0' || (value != 0.0 && value != 1.0))
        throw IoError("malformed value at line " + std::to_string(line_no) + ": '" + cell +
                      "' is not 0 or 1");
      row[static_cast<std::size_t>(j)] = value;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("no edges");
  AdjacencyMatrix F;
  F.entries.resize(static_cast<Index>(rows.size()), m);
  for (Index i = 0; i < F.entries.rows(); ++i)
    for (Index j = 0; j < m; ++j)
      F.entries(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  if (F.entries.sum() == 0.0) throw IoError("no edges");
  F.drug_ids = std::move(drug_ids);
  F.side_effect_ids = std::move(header);
  return F;
}

}  // namespace

void AdjacencyMatrix::validate() const {
  if (n_drugs() < 2 || n_side_effects() < 2)
    throw std::invalid_argument("adjacency matrix needs at least 2 drugs and 2 side effects");
  for (Index i = 0; i < entries.rows(); ++i)
    for (Index j = 0; j < entries.cols(); ++j)
      if (entries(i, j) != 0.0 && entries(i, j) != 1.0)
        throw std::invalid_argument("adjacency entry (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") is not binary");
  if (static_cast<Index>(drug_ids.size()) != n_drugs() ||
      static_cast<Index>(side_effect_ids.size()) != n_side_effects())
    throw std::invalid_argument("identifier list lengths do not match matrix dimensions");
  check_no_duplicates(drug_ids, "drug");
  check_no_duplicates(side_effect_ids, "side-effect");
}

AdjacencyMatrix load_edge_list(const std::string& path, EdgeFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  AdjacencyMatrix F =
      format == EdgeFormat::tsv_edges ? load_tsv_edges(in) : load_dense_csv(in);
  F.validate();
  return F;
}

DatasetStats stats(const AdjacencyMatrix& F) {
  DatasetStats s;
  s.n_drugs = F.n_drugs();
  s.n_side_effects = F.n_side_effects();
  s.n_associations = static_cast<std::int64_t>(std::llround(F.entries.sum()));
  const double total = static_cast<double>(s.n_drugs) * static_cast<double>(s.n_side_effects);
  s.sparsity = 1.0 - static_cast<double>(s.n_associations) / total;
  return s;
}

FoldAssignment make_folds(const AdjacencyMatrix& F, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw std::invalid_argument("make_folds: need at least 2 folds");
  const Index total = F.n_drugs() * F.n_side_effects();
  if (total < n_folds) throw std::invalid_argument("make_folds: fewer pairs than folds");
  std::vector<Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Index(0));
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  FoldAssignment folds;
  folds.n_folds = n_folds;
  folds.assignment.resize(F.n_drugs(), F.n_side_effects());
  for (Index k = 0; k < total; ++k) {
    const Index pair = order[static_cast<std::size_t>(k)];
    folds.assignment(pair % F.n_drugs(), pair / F.n_drugs()) = static_cast<int>(k % n_folds);
  }
  return folds;
}

MaskedFold mask_fold(const AdjacencyMatrix& F, const FoldAssignment& folds, int test_fold) {
  if (test_fold < 0 || test_fold >= folds.n_folds)
    throw std::invalid_argument("mask_fold: test fold out of range");
  if (folds.assignment.rows() != F.n_drugs() || folds.assignment.cols() != F.n_side_effects())
    throw std::invalid_argument("mask_fold: fold assignment does not match matrix");
  MaskedFold out;
  out.train = F;
  out.test_mask = Matrix::Zero(F.n_drugs(), F.n_side_effects());
  for (Index i = 0; i < F.n_drugs(); ++i) {
    for (Index j = 0; j < F.n_side_effects(); ++j) {
      if (folds.assignment(i, j) == test_fold) {
        out.train.entries(i, j) = 0.0;
        out.test_mask(i, j) = 1.0;
      }
    }
  }
  return out;
}

Matrix synthesize_scores(Index n, Index m, Index rank, std::uint64_t seed) {
  if (rank < 1 || rank > std::min(n, m))
    throw std::invalid_argument("synthesize: rank must be in [1, min(n,m)]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix U(n, rank), W(rank, m);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < rank; ++k) U(i, k) = std::abs(gauss(rng));
  for (Index k = 0; k < rank; ++k)
    for (Index j = 0; j < m; ++j) W(k, j) = std::abs(gauss(rng));
  return U * W;
}

AdjacencyMatrix synthesize(Index n, Index m, Index rank, double density, std::uint64_t seed) {
  if (!(density > 0.0 && density < 1.0))
    throw std::invalid_argument("synthesize: density must be in (0,1)");
  const Index total = n * m;
  const Index target = static_cast<Index>(std::llround(density * static_cast<double>(total)));
  if (target <= 0 || target >= total)
    throw std::invalid_argument("synthesize: infeasible density (no links or all links)");
  const Matrix scores = synthesize_scores(n, m, rank, seed);
  std::vector<Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores(a % n, a / n) > scores(b % n, b / n); });
  AdjacencyMatrix F;
  F.entries = Matrix::Zero(n, m);
  for (Index k = 0; k < target; ++k) {
    const Index pair = order[static_cast<std::size_t>(k)];
    F.entries(pair % n, pair / n) = 1.0;
  }
  F.drug_ids.reserve(static_cast<std::size_t>(n));
  F.side_effect_ids.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < n; ++i) F.drug_ids.push_back("d" + std::to_string(i));
  for (Index j = 0; j < m; ++j) F.side_effect_ids.push_back("s" + std::to_string(j));
  return F;
}

}  // namespace kronlp
