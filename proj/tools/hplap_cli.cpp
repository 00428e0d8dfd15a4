// hplap: graph / hypergraph construction, p-Laplacian eigen approximation,
// manifold-regularized kernel logistic regression and benchmarking.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hplap/hplap.hpp"

namespace fs = std::filesystem;
using namespace hplap;

namespace {

/// Flags shared by every subcommand. Values start at the built-in defaults;
/// only flags actually given override the JSON config.
struct CommonFlags {
  std::string config;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string variant = "hplapr";
  double p = 2.0;
  std::size_t k = 10;
  double gamma_a = 1e-4;
  double gamma_i = 1e-2;
  Eigen::Index embedding_dim = 0;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* variant_opt = nullptr;
  CLI::Option* p_opt = nullptr;
  CLI::Option* k_opt = nullptr;
  CLI::Option* gamma_a_opt = nullptr;
  CLI::Option* gamma_i_opt = nullptr;
  CLI::Option* embedding_dim_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON config file (flags override it, it overrides defaults)")
        ->check(CLI::ExistingFile);
    seed_opt = app->add_option("--seed", seed, "Seed for every random choice")->capture_default_str();
    out_opt = app->add_option("--out", out, "Output directory")->capture_default_str();
    variant_opt = app->add_option("--variant", variant, "Regularizer: lapr, plapr, hlapr, hplapr, supervised")
                      ->capture_default_str();
    p_opt = app->add_option("--p", p, "p-Laplacian exponent in [1, 3]")->capture_default_str();
    k_opt = app->add_option("--k", k, "Nearest neighbours per vertex / hyperedge")->capture_default_str();
    gamma_a_opt = app->add_option("--gamma-a", gamma_a, "Ambient (RKHS) regularization weight")->capture_default_str();
    gamma_i_opt = app->add_option("--gamma-i", gamma_i, "Intrinsic (manifold) regularization weight")
                      ->capture_default_str();
    embedding_dim_opt = app->add_option("--embedding-dim", embedding_dim,
                                        "Eigenvector count K (0: N up to 256 vertices, else 64)")
                            ->capture_default_str();
  }

  /// defaults < JSON config < flags
  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? RunConfig{} : load_run_config(config);
    if (seed_opt->count()) cfg.seed = seed;
    if (out_opt->count() || config.empty()) cfg.bench.output_dir = out;
    if (variant_opt->count()) cfg.variant = parse_variant(variant);
    if (p_opt->count()) cfg.p = p;
    if (k_opt->count()) cfg.k = k;
    if (gamma_a_opt->count()) cfg.gamma_a = gamma_a;
    if (gamma_i_opt->count()) cfg.gamma_i = gamma_i;
    if (embedding_dim_opt->count()) cfg.bench.settings.plap.embedding_dim = embedding_dim;
    return cfg;
  }
};

/// Graph construction flags used by build-graph, eigs and train.
struct GraphFlags {
  bool hypergraph = false;
  bool unit_weights = false;
  bool group_constrained = false;

  void attach(CLI::App* app) {
    app->add_flag("--hypergraph", hypergraph, "Build the kNN hypergraph instead of the kNN graph");
    app->add_flag("--unit-weights", unit_weights, "Unit edge weights instead of the heat kernel");
    app->add_flag("--group-constrained", group_constrained,
                  "Search hyperedge neighbours inside each row's group (needs the group column)");
  }

  void apply(RunConfig& cfg) const {
    if (unit_weights) cfg.bench.settings.graph.weights = WeightPolicy::unit;
    if (group_constrained) cfg.bench.settings.graph.group_constrained = true;
  }
};

fs::path prepare_out(const RunConfig& cfg) {
  fs::path dir(cfg.bench.output_dir);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path.string());
  out << j.dump(2) << '\n';
}

int cmd_build_graph(const CommonFlags& common, const GraphFlags& gf, const std::string& input) {
  RunConfig cfg = common.resolve();
  gf.apply(cfg);
  validate(cfg);
  const auto table = csv::read_features(input);
  const auto& g = cfg.bench.settings.graph;
  const auto dir = prepare_out(cfg);
  if (gf.hypergraph) {
    const auto hg = build_knn_hypergraph(table, cfg.k, g.weights, g.group_constrained);
    csv::write_matrix((dir / "incidence.csv").string(), hg.incidence());
    csv::write_matrix((dir / "edge_weights.csv").string(), hg.edge_weights());
    csv::write_matrix((dir / "vertex_degrees.csv").string(), hg.vertex_degrees());
    csv::write_matrix((dir / "adjacency.csv").string(), hypergraph_adjacency(hg).weights());
    csv::write_matrix((dir / "laplacian.csv").string(), hypergraph_laplacian(hg).matrix);
  } else {
    require(!g.group_constrained, "--group-constrained applies to --hypergraph only");
    const auto wg = build_knn_graph(table, cfg.k, g.weights);
    csv::write_matrix((dir / "weights.csv").string(), wg.weights());
    csv::write_matrix((dir / "laplacian.csv").string(), normalized_laplacian(wg).matrix);
    csv::write_matrix((dir / "unnormalized_laplacian.csv").string(), unnormalized_laplacian(wg).matrix);
  }
  std::cout << "wrote " << (gf.hypergraph ? "hypergraph" : "graph") << " over " << table.rows() << " rows to "
            << dir.string() << '\n';
  return 0;
}

struct EigsFlags {
  std::string input;
  std::string graph;
  std::string init = "normalized";
  int max_iters = 2000;
  double rel_tol = 1e-6;
  CLI::Option* max_iters_opt = nullptr;
  CLI::Option* rel_tol_opt = nullptr;
  CLI::Option* init_opt = nullptr;
};

int cmd_eigs(const CommonFlags& common, const GraphFlags& gf, const EigsFlags& ef) {
  RunConfig cfg = common.resolve();
  gf.apply(cfg);
  auto& plap = cfg.bench.settings.plap;
  if (ef.max_iters_opt->count()) plap.max_iters = ef.max_iters;
  if (ef.rel_tol_opt->count()) plap.rel_tol = ef.rel_tol;
  if (ef.init_opt->count()) cfg.bench.settings.init = detail::parse_init(ef.init);
  validate(cfg);
  require(ef.input.empty() != ef.graph.empty(), "give exactly one of --input or --graph");

  WeightedGraph w;
  LaplacianMatrix init;
  const bool normalized = cfg.bench.settings.init == InitLaplacian::normalized;
  if (!ef.graph.empty()) {
    w = WeightedGraph(csv::read_matrix(ef.graph));
    init = normalized ? normalized_laplacian(w) : unnormalized_laplacian(w);
  } else {
    const auto table = csv::read_features(ef.input);
    const auto& g = cfg.bench.settings.graph;
    if (gf.hypergraph) {
      const auto hg = build_knn_hypergraph(table, cfg.k, g.weights, g.group_constrained);
      w = hypergraph_adjacency(hg);
      init = normalized ? hypergraph_laplacian(hg) : unnormalized_laplacian(w);
    } else {
      w = build_knn_graph(table, cfg.k, g.weights);
      init = normalized ? normalized_laplacian(w) : unnormalized_laplacian(w);
    }
  }
  plap.p = cfg.p;
  const auto result = approximate_p_laplacian(w, init, plap);
  const auto dir = prepare_out(cfg);
  csv::write_matrix((dir / "eigenvalues.csv").string(), result.system.values);
  csv::write_matrix((dir / "eigenvectors.csv").string(), result.system.vectors);
  csv::write_matrix((dir / "p_laplacian.csv").string(), result.matrix);
  auto report = to_json(result.report);
  report["p"] = cfg.p;
  report["embedding_dim"] = result.system.vectors.cols();
  write_json(dir / "convergence.json", report);
  std::cout << "p=" << cfg.p << " K=" << result.system.vectors.cols() << " iterations=" << result.report.iterations
            << " objective=" << result.report.final_objective
            << (result.report.converged ? " converged" : " NOT converged") << '\n';
  return 0;
}

/// Rows with a label are the labeled set, the rest are unlabeled.
int cmd_train(const CommonFlags& common, const GraphFlags& gf, const std::string& input) {
  RunConfig cfg = common.resolve();
  gf.apply(cfg);
  validate(cfg);
  const auto table = csv::read_features(input);
  std::vector<Eigen::Index> labeled;
  for (std::size_t i = 0; i < table.rows(); ++i)
    if (table.class_labels[i]) labeled.push_back(static_cast<Eigen::Index>(i));
  require(!labeled.empty(), input + ": no labeled rows");

  RegularizerCache cache(table, cfg.bench.settings);
  const auto matrices = cache.get(cfg.variant, cfg.k, cfg.p);
  const auto n = static_cast<Eigen::Index>(table.rows());
  const auto& plap = cfg.bench.settings.plap;
  const auto hp = to_hyperparams(cfg.variant, GridPoint{cfg.k, cfg.p, cfg.gamma_a, cfg.gamma_i},
                                 plap.embedding_dim == 0 ? default_embedding_dim(n) : plap.embedding_dim);
  Hyperparams effective = hp;
  if (cfg.variant == Variant::supervised) effective.gamma_i = 0.0;
  const auto model = train_one_vs_rest(table.features, table.class_labels, labeled, matrices, cache.kernel(),
                                       effective, table.classes(), cfg.bench.settings.train);
  for (const auto& w : model.warnings) std::cerr << "warning: " << w << '\n';
  const auto dir = prepare_out(cfg);
  save_model((dir / "model.json").string(), model);
  nlohmann::json conv;
  conv["plap"] = cache.report(cfg.variant, cfg.k, cfg.p) ? to_json(*cache.report(cfg.variant, cfg.k, cfg.p))
                                                         : nlohmann::json(nullptr);
  auto train = nlohmann::json::array();
  for (std::size_t c = 0; c < model.models.size(); ++c)
    train.push_back({{"class", model.classes[c]},
                     {"iterations", model.models[c].report.iterations},
                     {"converged", model.models[c].report.converged},
                     {"final_objective", model.models[c].report.final_objective}});
  conv["train"] = train;
  write_json(dir / "convergence.json", conv);
  std::cout << "trained " << model.models.size() << " one-vs-rest models on " << labeled.size() << " labeled / "
            << table.rows() - labeled.size() << " unlabeled rows; wrote " << (dir / "model.json").string() << '\n';
  return 0;
}

int cmd_predict(const CommonFlags& common, const std::string& model_path, const std::string& input) {
  RunConfig cfg = common.resolve();
  const auto model = load_model(model_path);
  const auto table = csv::read_features(input);
  const Eigen::MatrixXd scores = model.scores(table.features);
  const auto dir = prepare_out(cfg);
  std::ofstream out(dir / "scores.csv");
  if (!out) throw Error("cannot write scores.csv");
  out << "id,predicted";
  for (int c : model.classes) out << ",score_" << c;
  out << '\n';
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    scores.row(i).maxCoeff(&best);
    out << table.id_of(static_cast<std::size_t>(i)) << ',' << model.classes[static_cast<std::size_t>(best)];
    for (Eigen::Index c = 0; c < scores.cols(); ++c) out << ',' << csv::format_double(scores(i, c));
    out << '\n';
  }
  std::cout << "scored " << scores.rows() << " rows; wrote " << (dir / "scores.csv").string() << '\n';
  return 0;
}

int cmd_evaluate(const CommonFlags& common, const GraphFlags& gf, std::optional<double> fraction) {
  RunConfig cfg = common.resolve();
  gf.apply(cfg);
  if (fraction) cfg.fraction = *fraction;
  if (!cfg.bench.dataset.synthetic && cfg.bench.dataset.csv_path.empty())
    cfg.bench.dataset.synthetic = SyntheticSpec{};
  const auto result = run_pipeline(cfg);
  write_pipeline_outputs(cfg, result);
  std::cout << to_string(cfg.variant) << " transductive mAP=" << result.fit.transductive.map;
  if (result.fit.inductive) std::cout << " inductive mAP=" << result.fit.inductive->map;
  std::cout << '\n';
  return 0;
}

int cmd_benchmark(const CommonFlags& common, const GraphFlags& gf) {
  RunConfig cfg = common.resolve();
  gf.apply(cfg);
  if (common.seed_opt->count()) {
    // --seed S replaces the seed list with S, S+1, ... of the same length.
    const auto count = cfg.bench.seeds.size();
    cfg.bench.seeds.clear();
    for (std::size_t i = 0; i < count; ++i) cfg.bench.seeds.push_back(common.seed + i);
  }
  if (!cfg.bench.dataset.synthetic && cfg.bench.dataset.csv_path.empty())
    cfg.bench.dataset.synthetic = SyntheticSpec{};
  run_stage("config", [&] {
    validate(cfg);
    cfg.bench.validate();
    return 0;
  });
  const auto result = run_benchmark(cfg.bench);
  write_benchmark_outputs(cfg, result);
  std::cout << map_by_fraction_csv(cfg.bench, result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hplap: hypergraph p-Laplacian regularized semi-supervised learning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  CommonFlags build_common, eigs_common, train_common, predict_common, eval_common, bench_common;
  GraphFlags build_graph, eigs_graph, train_graph, eval_graph, bench_graph;

  auto* build = app.add_subcommand("build-graph", "Build a kNN graph or hypergraph and its Laplacian");
  std::string build_input;
  build->add_option("--input", build_input, "Feature CSV (id,label,group,f0,...)")->required();
  build_common.attach(build);
  build_graph.attach(build);

  auto* eigs = app.add_subcommand("eigs", "Approximate p-Laplacian eigenpairs by projected gradient descent");
  EigsFlags eigs_flags;
  eigs->add_option("--input", eigs_flags.input, "Feature CSV to build the (hyper)graph from");
  eigs->add_option("--graph", eigs_flags.graph, "Dense symmetric weight matrix CSV");
  eigs_flags.max_iters_opt =
      eigs->add_option("--max-iters", eigs_flags.max_iters, "Iteration cap")->capture_default_str();
  eigs_flags.rel_tol_opt =
      eigs->add_option("--rel-tol", eigs_flags.rel_tol, "Relative objective change for convergence")
          ->capture_default_str();
  eigs_flags.init_opt = eigs->add_option("--init", eigs_flags.init,
                                         "Initializing Laplacian: normalized or unnormalized")
                            ->capture_default_str();
  eigs_common.attach(eigs);
  eigs_graph.attach(eigs);

  auto* train = app.add_subcommand("train", "Train one-vs-rest models; unlabeled CSV rows act as unlabeled data");
  std::string train_input;
  train->add_option("--input", train_input, "Feature CSV; empty label = unlabeled")->required();
  train_common.attach(train);
  train_graph.attach(train);

  auto* predict = app.add_subcommand("predict", "Score feature rows with a saved model");
  std::string model_path, predict_input;
  predict->add_option("--model", model_path, "Model JSON written by train")->required()->check(CLI::ExistingFile);
  predict->add_option("--input", predict_input, "Feature CSV to score")->required();
  predict_common.attach(predict);

  auto* evaluate = app.add_subcommand(
      "evaluate", "Run construct -> p-Laplacian -> train -> evaluate for one variant and one labeled split");
  double eval_fraction = 0.10;
  auto* fraction_opt =
      evaluate->add_option("--fraction", eval_fraction, "Labeled fraction of the pool")->capture_default_str();
  eval_common.attach(evaluate);
  eval_graph.attach(evaluate);

  auto* bench = app.add_subcommand("benchmark", "Cross-validated comparison of variants over labeled fractions");
  bench_common.attach(bench);
  bench_graph.attach(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*build) {
      if (build_input.empty() || !fs::exists(build_input)) throw Error("cannot open file: " + build_input);
      return cmd_build_graph(build_common, build_graph, build_input);
    }
    if (*eigs) return cmd_eigs(eigs_common, eigs_graph, eigs_flags);
    if (*train) return cmd_train(train_common, train_graph, train_input);
    if (*predict) return cmd_predict(predict_common, model_path, predict_input);
    if (*evaluate)
      return cmd_evaluate(eval_common, eval_graph,
                          fraction_opt->count() ? std::optional<double>(eval_fraction) : std::nullopt);
    if (*bench) return cmd_benchmark(bench_common, bench_graph);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
