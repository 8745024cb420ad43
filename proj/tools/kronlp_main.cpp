// kronlp: multi-view Kronecker RLS link propagation for bipartite networks.
//
// Subcommands: stats | kernels | train | cv | tune | predict.
// Exit codes: 0 success, 1 numerical failure, 2 I/O or configuration error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "kronlp/dataset.hpp"
#include "kronlp/eval.hpp"
#include "kronlp/fusion.hpp"
#include "kronlp/io.hpp"
#include "kronlp/kernels.hpp"
#include "kronlp/tuning.hpp"
#include "kronlp/types.hpp"

namespace {

using namespace kronlp;

struct RunConfig {
  std::string dataset;
  std::string format = "tsv";
  std::string views;  // empty selects the full 5 x 5 catalog
  int folds = 5;
  int repeats = 1;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out = "out";
  bool cache = false;
  std::string cache_dir;
  double mu = Hyperparams{}.mu;
  double beta = Hyperparams{}.beta;
  double sigma = Hyperparams{}.sigma;
  double epsilon = Hyperparams{}.epsilon;
  std::vector<std::string> lambda_specs;  // "value" broadcasts, "v=value" is per view
  int max_sweeps = Hyperparams{}.max_sweeps;
  double rel_tol = Hyperparams{}.rel_tol;
  int ntk_depth = 2;
  double gip_gamma = 1.0;
  int top_k = 20;
  std::string model;
  int grid_min = -10;
  int grid_max = 0;
  int lambda_grid_min = -5;
  int lambda_grid_max = 5;
  std::string stage = "both";  // lambda | fusion | both
};

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad config file " + path + ": " + e.what());
  }
  auto get = [&](const char* key, auto& target) {
    if (doc.contains(key)) target = doc.at(key).get<std::decay_t<decltype(target)>>();
  };
  get("dataset", cfg.dataset);
  get("format", cfg.format);
  get("views", cfg.views);
  get("folds", cfg.folds);
  get("repeats", cfg.repeats);
  get("seed", cfg.seed);
  get("jobs", cfg.jobs);
  get("out", cfg.out);
  get("cache", cfg.cache);
  get("cache_dir", cfg.cache_dir);
  get("mu", cfg.mu);
  get("beta", cfg.beta);
  get("sigma", cfg.sigma);
  get("epsilon", cfg.epsilon);
  get("max_sweeps", cfg.max_sweeps);
  get("rel_tol", cfg.rel_tol);
  get("ntk_depth", cfg.ntk_depth);
  get("gip_gamma", cfg.gip_gamma);
  get("top_k", cfg.top_k);
  get("model", cfg.model);
  if (doc.contains("lambda")) {
    cfg.lambda_specs.clear();
    const auto& lam = doc.at("lambda");
    if (lam.is_array()) {
      for (std::size_t v = 0; v < lam.size(); ++v)
        cfg.lambda_specs.push_back(std::to_string(v) + "=" + lam[v].dump());
    } else {
      cfg.lambda_specs.push_back(lam.dump());
    }
  }
}

EdgeFormat parse_format(const std::string& format) {
  if (format == "tsv" || format == "tsv_edges") return EdgeFormat::tsv_edges;
  if (format == "csv" || format == "dense_csv") return EdgeFormat::dense_csv;
  throw std::invalid_argument("unknown dataset format: " + format + " (expected tsv|csv)");
}

// "--views gip_d:ntk_s,cos_d:ntk_s" selects pairwise kernels; the selection
// must form a full cross product of the drug and side-effect kinds it names.
KernelConfig parse_views(const RunConfig& cfg) {
  KernelConfig kernel_config;
  kernel_config.gip_gamma = cfg.gip_gamma;
  kernel_config.ntk_depth = cfg.ntk_depth;
  if (cfg.views.empty()) return kernel_config;

  auto strip_suffix = [](std::string token, const std::string& suffix) {
    if (token.size() <= suffix.size() ||
        token.compare(token.size() - suffix.size(), suffix.size(), suffix) != 0)
      throw std::invalid_argument("bad view token '" + token + "': expected <kind>" + suffix);
    return token.substr(0, token.size() - suffix.size());
  };
  std::vector<KernelKind> drug_kinds, side_kinds;
  std::vector<std::pair<KernelKind, KernelKind>> requested;
  std::istringstream in(cfg.views);
  std::string pair_token;
  while (std::getline(in, pair_token, ',')) {
    const auto colon = pair_token.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("bad view '" + pair_token + "': expected kind_d:kind_s");
    const KernelKind d = kernel_kind_from_string(strip_suffix(pair_token.substr(0, colon), "_d"));
    const KernelKind s = kernel_kind_from_string(strip_suffix(pair_token.substr(colon + 1), "_s"));
    if (std::find(drug_kinds.begin(), drug_kinds.end(), d) == drug_kinds.end())
      drug_kinds.push_back(d);
    if (std::find(side_kinds.begin(), side_kinds.end(), s) == side_kinds.end())
      side_kinds.push_back(s);
    requested.emplace_back(d, s);
  }
  if (requested.size() != drug_kinds.size() * side_kinds.size())
    throw std::invalid_argument(
        "--views must cover the full cross product of the named drug and side-effect kernels");
  kernel_config.drug_kinds = std::move(drug_kinds);
  kernel_config.side_kinds = std::move(side_kinds);
  return kernel_config;
}

std::vector<double> resolve_lambdas(const std::vector<std::string>& specs, Index n_views) {
  std::vector<double> lambdas(static_cast<std::size_t>(n_views), 1.0);
  for (const std::string& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
      const double value = std::stod(spec);
      std::fill(lambdas.begin(), lambdas.end(), value);
    } else {
      const int v = std::stoi(spec.substr(0, eq));
      const double value = std::stod(spec.substr(eq + 1));
      if (v < 0 || v >= static_cast<int>(n_views))
        throw std::invalid_argument("lambda view index out of range: " + spec);
      lambdas[static_cast<std::size_t>(v)] = value;
    }
  }
  return lambdas;
}

Hyperparams hyperparams_from(const RunConfig& cfg, Index n_views) {
  Hyperparams hp;
  hp.mu = cfg.mu;
  hp.beta = cfg.beta;
  hp.sigma = cfg.sigma;
  hp.epsilon = cfg.epsilon;
  hp.max_sweeps = cfg.max_sweeps;
  hp.rel_tol = cfg.rel_tol;
  hp.lambdas = resolve_lambdas(cfg.lambda_specs, n_views);
  hp.validate();
  return hp;
}

std::string effective_cache_dir(const RunConfig& cfg) {
  if (!cfg.cache) return "";
  if (!cfg.cache_dir.empty()) return cfg.cache_dir;
  if (const char* env = std::getenv("KRONLP_CACHE_DIR"); env && *env) return env;
  return cfg.out + "/kernel-cache";
}

AdjacencyMatrix load_dataset(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw std::invalid_argument("--dataset is required");
  return load_edge_list(cfg.dataset, parse_format(cfg.format));
}

std::string percent2(double fraction) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f%%", 100.0 * fraction);
  return buffer;
}

int cmd_stats(const RunConfig& cfg) {
  const AdjacencyMatrix F = load_dataset(cfg);
  const DatasetStats s = stats(F);
  std::ostringstream text;
  text << "drugs: " << s.n_drugs << '\n'
       << "side_effects: " << s.n_side_effects << '\n'
       << "associations: " << s.n_associations << '\n'
       << "sparsity: " << percent2(s.sparsity) << '\n';
  std::cout << text.str();
  ensure_directory(cfg.out);
  std::ofstream out(cfg.out + "/stats.txt");
  if (!out) throw IoError("cannot write " + cfg.out + "/stats.txt");
  out << text.str();
  return 0;
}

int cmd_kernels(const RunConfig& cfg) {
  const AdjacencyMatrix F = load_dataset(cfg);
  const KernelConfig kernel_config = parse_views(cfg);
  std::string dir = effective_cache_dir(cfg);
  if (dir.empty()) dir = cfg.out + "/kernel-cache";
  const ViewCatalog catalog = build_catalog_cached(F, kernel_config, dir, "full");
  std::cout << "kernels: " << catalog.drug_kernels.size() << " drug x "
            << catalog.side_effect_kernels.size() << " side-effect, " << catalog.n_views()
            << " views\ncache: " << dir << '\n';
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  const AdjacencyMatrix F = load_dataset(cfg);
  const KernelConfig kernel_config = parse_views(cfg);
  const ViewCatalog catalog =
      build_catalog_cached(F, kernel_config, effective_cache_dir(cfg), "full");
  const Hyperparams hp = hyperparams_from(cfg, catalog.n_views());
  const FusionState state = fit_fusion(catalog, F.entries, hp);

  ensure_directory(cfg.out);
  write_matrix_f64(cfg.out + "/consensus.f64", state.consensus);
  write_fit_trace(cfg.out + "/trace.txt", state);
  nlohmann::json model;
  model["dataset_hash"] = dataset_hash(F);
  model["n_drugs"] = F.n_drugs();
  model["n_side_effects"] = F.n_side_effects();
  model["sweeps"] = state.sweeps;
  model["objective"] = state.trace.back().objective;
  model["w"] = std::vector<double>(state.w.data(), state.w.data() + state.w.size());
  model["theta_d"] =
      std::vector<double>(state.theta_d.data(), state.theta_d.data() + state.theta_d.size());
  model["theta_s"] =
      std::vector<double>(state.theta_s.data(), state.theta_s.data() + state.theta_s.size());
  model["lambdas"] = state.lambdas;
  model["mu"] = hp.mu;
  model["beta"] = hp.beta;
  model["sigma"] = hp.sigma;
  model["epsilon"] = hp.epsilon;
  std::ofstream out(cfg.out + "/state.json");
  if (!out) throw IoError("cannot write " + cfg.out + "/state.json");
  out << model.dump(2) << '\n';
  std::cout << "sweeps: " << state.sweeps << "\nobjective: " << state.trace.back().objective
            << "\nmodel: " << cfg.out << '\n';
  return 0;
}

int cmd_cv(const RunConfig& cfg) {
  const AdjacencyMatrix F = load_dataset(cfg);
  const KernelConfig kernel_config = parse_views(cfg);
  Hyperparams hp;
  {
    // View count equals the cross product of the selected kinds.
    const Index n_views = static_cast<Index>(kernel_config.drug_kinds.size()) *
                          static_cast<Index>(kernel_config.side_kinds.size());
    hp = hyperparams_from(cfg, n_views);
  }
  CvOptions options;
  options.n_folds = cfg.folds;
  options.n_repeats = cfg.repeats;
  options.seed = cfg.seed;
  options.jobs = cfg.jobs;
  options.cache_dir = effective_cache_dir(cfg);

  ensure_directory(cfg.out);
  FoldSink sink = [&](const MetricsReport& report, const FusionState& state,
                      const ScoredPairs& pairs) {
    const std::string tag =
        "r" + std::to_string(report.repeat_idx) + "_f" + std::to_string(report.fold_idx);
    write_pr_curve_tsv(cfg.out + "/pr_" + tag + ".tsv", pairs);
    write_fit_trace(cfg.out + "/trace_" + tag + ".txt", state);
  };
  const CvResult result = cross_validate(F, kernel_config, hp, options, sink);
  write_report_txt(cfg.out + "/report.txt", result);
  write_fold_reports_tsv(cfg.out + "/folds.tsv", result.reports);
  write_summary_json(cfg.out + "/summary.json", result);
  std::printf("aupr: %.4f +/- %.4f\n", result.mean.aupr, result.stddev.aupr);
  std::printf("auc: %.4f +/- %.4f\n", result.mean.auc, result.stddev.auc);
  std::printf("f_score: %.4f +/- %.4f\n", result.mean.f_score, result.stddev.f_score);
  std::cout << "reports: " << cfg.out << '\n';
  return 0;
}

int cmd_tune(const RunConfig& cfg) {
  const AdjacencyMatrix F = load_dataset(cfg);
  const KernelConfig kernel_config = parse_views(cfg);
  ensure_directory(cfg.out);
  const Index n_views = static_cast<Index>(kernel_config.drug_kinds.size()) *
                        static_cast<Index>(kernel_config.side_kinds.size());
  Hyperparams hp = hyperparams_from(cfg, n_views);

  if (cfg.stage == "lambda" || cfg.stage == "both") {
    const LambdaTuneResult stage1 = tune_lambdas(
        F, kernel_config, power_grid(cfg.lambda_grid_min, cfg.lambda_grid_max), cfg.folds,
        cfg.seed);
    hp.lambdas = stage1.lambdas;
    std::ofstream out(cfg.out + "/lambda_leaderboard.tsv");
    out << "view";
    for (double g : stage1.grid) out << "\tlambda=" << g;
    out << '\n';
    for (Index v = 0; v < stage1.mean_aupr.rows(); ++v) {
      out << v;
      for (Index g = 0; g < stage1.mean_aupr.cols(); ++g) out << '\t' << stage1.mean_aupr(v, g);
      out << '\n';
    }
    std::cout << "lambda stage done: best per view written\n";
  }

  FusionTunePoint best{hp.mu, hp.beta, hp.sigma, -1.0};
  if (cfg.stage == "fusion" || cfg.stage == "both") {
    const FusionTuneResult stage2 =
        tune_fusion(F, kernel_config, hp, power_grid(cfg.grid_min, cfg.grid_max), cfg.folds,
                    cfg.seed, cfg.jobs);
    best = stage2.best;
    std::ofstream out(cfg.out + "/fusion_leaderboard.tsv");
    out << "mu\tbeta\tsigma\tmean_aupr\n";
    for (const auto& p : stage2.leaderboard)
      out << p.mu << '\t' << p.beta << '\t' << p.sigma << '\t' << p.mean_aupr << '\n';
  }

  nlohmann::json doc;
  doc["lambda"] = hp.lambdas;
  doc["mu"] = best.mu;
  doc["beta"] = best.beta;
  doc["sigma"] = best.sigma;
  doc["epsilon"] = hp.epsilon;
  if (best.mean_aupr >= 0) doc["mean_aupr"] = best.mean_aupr;
  std::ofstream out(cfg.out + "/best.json");
  out << doc.dump(2) << '\n';
  std::cout << "best: mu=" << best.mu << " beta=" << best.beta << " sigma=" << best.sigma
            << '\n';
  return 0;
}

int cmd_predict(const RunConfig& cfg) {
  const AdjacencyMatrix F = load_dataset(cfg);
  if (cfg.model.empty()) throw std::invalid_argument("--model is required for predict");
  const Matrix scores = read_matrix_f64(cfg.model + "/consensus.f64");
  if (scores.rows() != F.n_drugs() || scores.cols() != F.n_side_effects())
    throw std::invalid_argument("model dump dimensions do not match the dataset");

  ensure_directory(cfg.out);
  write_matrix_f64(cfg.out + "/scores.f64", scores);
  write_matrix_csv(cfg.out + "/scores.csv", scores);
  if (cfg.top_k <= 0) return 0;

  struct Novel {
    double score;
    Index i, j;
  };
  std::vector<Novel> novel;
  for (Index i = 0; i < F.n_drugs(); ++i)
    for (Index j = 0; j < F.n_side_effects(); ++j)
      if (F.entries(i, j) == 0.0) novel.push_back({scores(i, j), i, j});
  std::stable_sort(novel.begin(), novel.end(),
                   [](const Novel& a, const Novel& b) { return a.score > b.score; });
  const std::size_t k = std::min<std::size_t>(novel.size(), static_cast<std::size_t>(
                                                                std::max(0, cfg.top_k)));
  std::ofstream out(cfg.out + "/top_links.tsv");
  out << "drug\tside_effect\tscore\n";
  for (std::size_t t = 0; t < k; ++t) {
    out << F.drug_ids[static_cast<std::size_t>(novel[t].i)] << '\t'
        << F.side_effect_ids[static_cast<std::size_t>(novel[t].j)] << '\t' << novel[t].score
        << '\n';
    std::cout << F.drug_ids[static_cast<std::size_t>(novel[t].i)] << '\t'
              << F.side_effect_ids[static_cast<std::size_t>(novel[t].j)] << '\t'
              << novel[t].score << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view Kronecker RLS link propagation for bipartite networks"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--dataset", cfg.dataset, "dataset file");
    sub->add_option("--format", cfg.format, "dataset format: tsv|csv");
    sub->add_option("--config", config_path, "JSON config file (flags override it)");
    sub->add_option("--views", cfg.views, "pairwise kernels, e.g. gip_d:ntk_s,cos_d:ntk_s");
    sub->add_option("--folds", cfg.folds, "cross-validation folds");
    sub->add_option("--repeats", cfg.repeats, "cross-validation repeats");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--jobs", cfg.jobs, "parallel fold workers");
    sub->add_option("--out", cfg.out, "output directory");
    sub->add_flag("--cache", cfg.cache, "cache kernels on disk");
    sub->add_option("--cache-dir", cfg.cache_dir,
                    "kernel cache directory (default $KRONLP_CACHE_DIR)");
    sub->add_option("--mu", cfg.mu, "consensus coupling weight");
    sub->add_option("--beta", cfg.beta, "view-weight ridge");
    sub->add_option("--sigma", cfg.sigma, "Laplacian smoothness weight");
    sub->add_option("--epsilon", cfg.epsilon, "graph-weight exponent (> 1)");
    sub->add_option("--lambda", cfg.lambda_specs,
                    "per-view regularization: value or view=value, repeatable");
    sub->add_option("--max-sweeps", cfg.max_sweeps, "optimizer sweep limit");
    sub->add_option("--rel-tol", cfg.rel_tol, "objective relative tolerance");
    sub->add_option("--ntk-depth", cfg.ntk_depth, "NTK network depth");
    sub->add_option("--gip-gamma", cfg.gip_gamma, "GIP bandwidth");
    sub->add_option("--top-k", cfg.top_k, "novel links to list");
    sub->add_option("--model", cfg.model, "model dump directory (predict)");
    sub->add_option("--grid-min", cfg.grid_min, "fusion grid: smallest power of 2");
    sub->add_option("--grid-max", cfg.grid_max, "fusion grid: largest power of 2");
    sub->add_option("--lambda-grid-min", cfg.lambda_grid_min, "lambda grid: smallest power of 2");
    sub->add_option("--lambda-grid-max", cfg.lambda_grid_max, "lambda grid: largest power of 2");
    sub->add_option("--stage", cfg.stage, "tune stage: lambda|fusion|both");
  };

  CLI::App* stats_cmd = app.add_subcommand("stats", "dataset statistics");
  CLI::App* kernels_cmd = app.add_subcommand("kernels", "build and cache kernels");
  CLI::App* train_cmd = app.add_subcommand("train", "fit the fusion model on the full dataset");
  CLI::App* cv_cmd = app.add_subcommand("cv", "repeated masked cross-validation");
  CLI::App* tune_cmd = app.add_subcommand("tune", "two-stage hyperparameter grid search");
  CLI::App* predict_cmd = app.add_subcommand("predict", "export scores and top novel links");
  for (CLI::App* sub : {stats_cmd, kernels_cmd, train_cmd, cv_cmd, tune_cmd, predict_cmd})
    add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) {
      // Flags beat the file: re-parse the command line after the file fills
      // in whatever was not explicitly given.
      RunConfig from_file;
      apply_config_file(from_file, config_path);
      RunConfig merged = from_file;
      auto keep_flag = [&](const char* name, auto member) {
        if (sub->count(name)) merged.*member = cfg.*member;
      };
      keep_flag("--dataset", &RunConfig::dataset);
      keep_flag("--format", &RunConfig::format);
      keep_flag("--views", &RunConfig::views);
      keep_flag("--folds", &RunConfig::folds);
      keep_flag("--repeats", &RunConfig::repeats);
      keep_flag("--seed", &RunConfig::seed);
      keep_flag("--jobs", &RunConfig::jobs);
      keep_flag("--out", &RunConfig::out);
      keep_flag("--cache", &RunConfig::cache);
      keep_flag("--cache-dir", &RunConfig::cache_dir);
      keep_flag("--mu", &RunConfig::mu);
      keep_flag("--beta", &RunConfig::beta);
      keep_flag("--sigma", &RunConfig::sigma);
      keep_flag("--epsilon", &RunConfig::epsilon);
      keep_flag("--lambda", &RunConfig::lambda_specs);
      keep_flag("--max-sweeps", &RunConfig::max_sweeps);
      keep_flag("--rel-tol", &RunConfig::rel_tol);
      keep_flag("--ntk-depth", &RunConfig::ntk_depth);
      keep_flag("--gip-gamma", &RunConfig::gip_gamma);
      keep_flag("--top-k", &RunConfig::top_k);
      keep_flag("--model", &RunConfig::model);
      keep_flag("--grid-min", &RunConfig::grid_min);
      keep_flag("--grid-max", &RunConfig::grid_max);
      keep_flag("--lambda-grid-min", &RunConfig::lambda_grid_min);
      keep_flag("--lambda-grid-max", &RunConfig::lambda_grid_max);
      keep_flag("--stage", &RunConfig::stage);
      cfg = merged;
    }

    if (sub == stats_cmd) return cmd_stats(cfg);
    if (sub == kernels_cmd) return cmd_kernels(cfg);
    if (sub == train_cmd) return cmd_train(cfg);
    if (sub == cv_cmd) return cmd_cv(cfg);
    if (sub == tune_cmd) return cmd_tune(cfg);
    if (sub == predict_cmd) return cmd_predict(cfg);
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
