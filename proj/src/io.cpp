#include "kronlp/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kronlp/eval.hpp"

namespace kronlp {

namespace {

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open file for writing: " + path);
  return out;
}

}  // namespace

void write_matrix_csv(const std::string& path, const Matrix& M) {
  std::ofstream out = open_out(path);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      out << format_double(M(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing matrix to " + path);
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      char* end = nullptr;
      const double value = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw IoError("bad number at line " + std::to_string(line_no));
      row.push_back(value);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("ragged matrix row at line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty matrix file: " + path);
  Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j)
      M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return M;
}

void write_matrix_f64(const std::string& path, const Matrix& M) {
  std::ofstream out = open_out(path, std::ios::binary);
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(M.rows()),
                                 static_cast<std::uint64_t>(M.cols())};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) {
      const double value = M(i, j);
      out.write(reinterpret_cast<const char*>(&value), sizeof(value));
    }
  if (!out) throw IoError("failed writing matrix to " + path);
}

Matrix read_matrix_f64(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open matrix file: " + path);
  std::uint64_t dims[2] = {0, 0};
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || dims[0] == 0 || dims[1] == 0) throw IoError("bad matrix header in " + path);
  Matrix M(static_cast<Index>(dims[0]), static_cast<Index>(dims[1]));
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) {
      double value = 0.0;
      in.read(reinterpret_cast<char*>(&value), sizeof(value));
      M(i, j) = value;
    }
  if (!in) throw IoError("truncated matrix file: " + path);
  return M;
}

std::string dataset_hash(const AdjacencyMatrix& F) {
  std::uint64_t hash = 1469598103934665603ull;
  auto mix = [&](std::uint64_t value) {
    for (int b = 0; b < 8; ++b) {
      hash ^= (value >> (8 * b)) & 0xffu;
      hash *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(F.n_drugs()));
  mix(static_cast<std::uint64_t>(F.n_side_effects()));
  for (Index i = 0; i < F.entries.rows(); ++i)
    for (Index j = 0; j < F.entries.cols(); ++j)
      mix(F.entries(i, j) != 0.0 ? 1u : 0u);
  char buffer[20];
  std::snprintf(buffer, sizeof(buffer), "%016" PRIx64, hash);
  return buffer;
}

std::string matrix_hash(const Matrix& M) {
  std::uint64_t hash = 1469598103934665603ull;
  auto mix = [&](std::uint64_t value) {
    for (int b = 0; b < 8; ++b) {
      hash ^= (value >> (8 * b)) & 0xffu;
      hash *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(M.rows()));
  mix(static_cast<std::uint64_t>(M.cols()));
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) {
      std::uint64_t bits = 0;
      const double value = M(i, j);
      std::memcpy(&bits, &value, sizeof(bits));
      mix(bits);
    }
  char buffer[20];
  std::snprintf(buffer, sizeof(buffer), "%016" PRIx64, hash);
  return buffer;
}

void write_kron_rls_dump(const std::string& dir, const KronRlsModel& model,
                         const std::string& drug_kernel_hash,
                         const std::string& side_kernel_hash) {
  ensure_directory(dir);
  write_matrix_f64(dir + "/dual.f64", model.dual);
  nlohmann::json meta;
  meta["lambda"] = model.lambda;
  meta["drug_kernel_hash"] = drug_kernel_hash;
  meta["side_kernel_hash"] = side_kernel_hash;
  std::ofstream out = open_out(dir + "/model.json");
  out << meta.dump(2) << '\n';
}

KronRlsDump read_kron_rls_dump(const std::string& dir) {
  KronRlsDump dump;
  dump.dual = read_matrix_f64(dir + "/dual.f64");
  std::ifstream in(dir + "/model.json");
  if (!in) throw IoError("cannot open model dump: " + dir + "/model.json");
  nlohmann::json meta;
  try {
    in >> meta;
    dump.lambda = meta.at("lambda").get<double>();
    dump.drug_kernel_hash = meta.at("drug_kernel_hash").get<std::string>();
    dump.side_kernel_hash = meta.at("side_kernel_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad model dump " + dir + "/model.json: " + e.what());
  }
  return dump;
}

std::string kernel_cache_path(const std::string& dir, const std::string& hash,
                              const std::string& fold_tag, KernelKind kind, KernelSpace space) {
  return dir + "/" + hash + "-" + fold_tag + "-" + to_string(kind) + "-" + to_string(space) +
         ".f64";
}

std::optional<Matrix> load_cached_kernel(const std::string& path) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  return read_matrix_f64(path);
}

void store_cached_kernel(const std::string& path, const Matrix& values) {
  write_matrix_f64(path, values);
}

ViewCatalog build_catalog_cached(const AdjacencyMatrix& train, const KernelConfig& config,
                                 const std::string& cache_dir, const std::string& fold_tag) {
  if (cache_dir.empty()) return build_catalog(train, config);
  ensure_directory(cache_dir);
  const std::string hash = dataset_hash(train);
  ViewCatalog catalog;
  const Matrix side_profiles = train.entries.transpose();
  auto build_one = [&](KernelKind kind, KernelSpace space) {
    const std::string path = kernel_cache_path(cache_dir, hash, fold_tag, kind, space);
    if (auto cached = load_cached_kernel(path)) return KernelMatrix{std::move(*cached), kind, space};
    KernelMatrix K = psd_repair(make_kernel(
        kind, space == KernelSpace::drug ? train.entries : side_profiles, config, space));
    store_cached_kernel(path, K.values);
    return K;
  };
  for (KernelKind kind : config.drug_kinds)
    catalog.drug_kernels.push_back(build_one(kind, KernelSpace::drug));
  for (KernelKind kind : config.side_kinds)
    catalog.side_effect_kernels.push_back(build_one(kind, KernelSpace::side_effect));
  for (int d = 0; d < static_cast<int>(catalog.drug_kernels.size()); ++d)
    for (int s = 0; s < static_cast<int>(catalog.side_effect_kernels.size()); ++s)
      catalog.views.emplace_back(d, s);
  return catalog;
}

void write_report_txt(const std::string& path, const CvResult& result) {
  std::ofstream out = open_out(path);
  auto line = [&](const char* name, double mean, double sd) {
    out << name << ": " << format_double(mean) << " +/- " << format_double(sd) << '\n';
  };
  line("aupr", result.mean.aupr, result.stddev.aupr);
  line("auc", result.mean.auc, result.stddev.auc);
  line("recall", result.mean.recall, result.stddev.recall);
  line("precision", result.mean.precision, result.stddev.precision);
  line("f_score", result.mean.f_score, result.stddev.f_score);
  line("threshold", result.mean.threshold, result.stddev.threshold);
  out << "n_reports: " << result.reports.size() << '\n';
}

void write_fold_reports_tsv(const std::string& path, const std::vector<MetricsReport>& reports) {
  std::ofstream out = open_out(path);
  out << "repeat\tfold\taupr\tauc\trecall\tprecision\tf_score\tthreshold\tn_pos\tn_neg\n";
  for (const auto& r : reports) {
    out << r.repeat_idx << '\t' << r.fold_idx << '\t' << format_double(r.aupr) << '\t'
        << format_double(r.auc) << '\t' << format_double(r.recall) << '\t'
        << format_double(r.precision) << '\t' << format_double(r.f_score) << '\t'
        << format_double(r.threshold) << '\t' << r.n_pos << '\t' << r.n_neg << '\n';
  }
}

void write_summary_json(const std::string& path, const CvResult& result) {
  nlohmann::json summary;
  auto metric = [](double mean, double sd) {
    return nlohmann::json{{"mean", mean}, {"stddev", sd}};
  };
  summary["aupr"] = metric(result.mean.aupr, result.stddev.aupr);
  summary["auc"] = metric(result.mean.auc, result.stddev.auc);
  summary["recall"] = metric(result.mean.recall, result.stddev.recall);
  summary["precision"] = metric(result.mean.precision, result.stddev.precision);
  summary["f_score"] = metric(result.mean.f_score, result.stddev.f_score);
  summary["threshold"] = metric(result.mean.threshold, result.stddev.threshold);
  summary["n_reports"] = result.reports.size();
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& r : result.reports) {
    folds.push_back({{"repeat", r.repeat_idx},
                     {"fold", r.fold_idx},
                     {"aupr", r.aupr},
                     {"auc", r.auc},
                     {"recall", r.recall},
                     {"precision", r.precision},
                     {"f_score", r.f_score},
                     {"threshold", r.threshold},
                     {"n_pos", r.n_pos},
                     {"n_neg", r.n_neg}});
  }
  summary["folds"] = std::move(folds);
  std::ofstream out = open_out(path);
  out << summary.dump(2) << '\n';
}

void write_pr_curve_tsv(const std::string& path, const ScoredPairs& pairs) {
  std::ofstream out = open_out(path);
  out << "recall\tprecision\n";
  for (const auto& [recall, precision] : pr_curve(pairs))
    out << format_double(recall) << '\t' << format_double(precision) << '\n';
}

void write_fit_trace(const std::string& path, const FusionState& state) {
  std::ofstream out = open_out(path);
  auto append = [&](const char* name, const Vector& v) {
    out << '\t' << name << '=';
    for (Index i = 0; i < v.size(); ++i) {
      if (i) out << ',';
      out << format_double(v[i]);
    }
  };
  for (const auto& record : state.trace) {
    out << "sweep=" << record.sweep << "\tobjective=" << format_double(record.objective);
    append("w", record.w);
    append("theta_d", record.theta_d);
    append("theta_s", record.theta_s);
    out << '\n';
  }
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory " + path + ": " + ec.message());
}

}  // namespace kronlp
