#ifndef HPLAP_CONFIG_HPP_
#define HPLAP_CONFIG_HPP_

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hplap/benchmark.hpp"
#include "hplap/error.hpp"
#include "hplap/experiment.hpp"
#include "hplap/model_io.hpp"

namespace hplap {

inline constexpr const char* kVersion = "0.1.0";

/// Everything a subcommand can be configured with. Each subcommand reads the
/// fields it needs; `bench` carries dataset, grids and solver settings.
struct RunConfig {
  BenchmarkConfig bench;
  Variant variant = Variant::hplapr;
  std::size_t k = 10;
  double p = 2.0;
  double gamma_a = 1e-4;
  double gamma_i = 1e-2;
  double fraction = 0.10;
  std::uint64_t seed = 1;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                                const std::string& where) {
  require(j.is_object(), where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    require(known.count(key) > 0, "unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config key '") + key + "': " + e.what());
  }
}

inline WeightPolicy parse_weights(const std::string& s) {
  if (s == "gaussian") return WeightPolicy::gaussian;
  if (s == "unit") return WeightPolicy::unit;
  throw Error("unknown weight policy '" + s + "' (expected gaussian or unit)");
}

inline InitLaplacian parse_init(const std::string& s) {
  if (s == "normalized") return InitLaplacian::normalized;
  if (s == "unnormalized") return InitLaplacian::unnormalized;
  throw Error("unknown init Laplacian '" + s + "' (expected normalized or unnormalized)");
}

}  // namespace detail

inline const char* to_string(WeightPolicy w) { return w == WeightPolicy::unit ? "unit" : "gaussian"; }
inline const char* to_string(InitLaplacian i) {
  return i == InitLaplacian::unnormalized ? "unnormalized" : "normalized";
}

inline void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  using detail::read;
  detail::reject_unknown_keys(j,
                              {"dataset", "variants", "fractions", "seeds", "validation", "grid", "graph", "plap",
                               "train", "kernel", "output_dir", "variant", "k", "p", "gamma_a", "gamma_i",
                               "fraction", "seed"},
                              "config");
  auto& b = cfg.bench;
  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    detail::reject_unknown_keys(d, {"synthetic", "csv", "test_csv", "test_points_per_class"}, "dataset");
    if (d.contains("synthetic")) {
      const auto& s = d.at("synthetic");
      detail::reject_unknown_keys(s, {"classes", "groups", "points_per_class", "noise", "dims", "group_spread",
                                      "class_spread", "elongation"},
                                  "dataset.synthetic");
      SyntheticSpec spec;
      read(s, "classes", spec.classes);
      read(s, "groups", spec.groups);
      read(s, "points_per_class", spec.points_per_class);
      read(s, "noise", spec.noise);
      read(s, "dims", spec.dims);
      read(s, "group_spread", spec.group_spread);
      read(s, "class_spread", spec.class_spread);
      read(s, "elongation", spec.elongation);
      spec.validate();
      b.dataset.synthetic = spec;
      b.dataset.csv_path.clear();
    }
    if (d.contains("csv")) {
      read(d, "csv", b.dataset.csv_path);
      b.dataset.synthetic.reset();
    }
    read(d, "test_csv", b.dataset.test_csv_path);
    read(d, "test_points_per_class", b.dataset.test_points_per_class);
    require(b.dataset.test_points_per_class >= 0, "test_points_per_class must be nonnegative");
  }
  if (j.contains("variants")) {
    b.variants.clear();
    for (const auto& v : j.at("variants")) b.variants.push_back(parse_variant(v.get<std::string>()));
  }
  read(j, "fractions", b.fractions);
  read(j, "seeds", b.seeds);
  if (j.contains("validation")) {
    const auto& v = j.at("validation");
    detail::reject_unknown_keys(v, {"fraction", "repeats"}, "validation");
    read(v, "fraction", b.validation_fraction);
    read(v, "repeats", b.validation_repeats);
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    detail::reject_unknown_keys(g, {"p", "gamma_a", "gamma_i", "k"}, "grid");
    read(g, "p", b.grid.p);
    read(g, "gamma_a", b.grid.gamma_a);
    read(g, "gamma_i", b.grid.gamma_i);
    read(g, "k", b.grid.k);
  }
  auto& s = b.settings;
  if (j.contains("graph")) {
    const auto& g = j.at("graph");
    detail::reject_unknown_keys(g, {"weights", "group_constrained"}, "graph");
    std::string weights = to_string(s.graph.weights);
    read(g, "weights", weights);
    s.graph.weights = detail::parse_weights(weights);
    read(g, "group_constrained", s.graph.group_constrained);
  }
  if (j.contains("plap")) {
    const auto& pl = j.at("plap");
    detail::reject_unknown_keys(pl, {"embedding_dim", "max_iters", "rel_tol", "step_scale", "max_halvings", "init"},
                                "plap");
    read(pl, "embedding_dim", s.plap.embedding_dim);
    read(pl, "max_iters", s.plap.max_iters);
    read(pl, "rel_tol", s.plap.rel_tol);
    read(pl, "step_scale", s.plap.step_scale);
    read(pl, "max_halvings", s.plap.max_halvings);
    std::string init = to_string(s.init);
    read(pl, "init", init);
    s.init = detail::parse_init(init);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    detail::reject_unknown_keys(t, {"epsilon", "max_iters"}, "train");
    read(t, "epsilon", s.train.epsilon);
    read(t, "max_iters", s.train.max_iters);
  }
  if (j.contains("kernel") && !j.at("kernel").is_null()) s.kernel = kernel_from_json(j.at("kernel"));
  read(j, "output_dir", b.output_dir);
  if (j.contains("variant")) cfg.variant = parse_variant(j.at("variant").get<std::string>());
  read(j, "k", cfg.k);
  read(j, "p", cfg.p);
  read(j, "gamma_a", cfg.gamma_a);
  read(j, "gamma_i", cfg.gamma_i);
  read(j, "fraction", cfg.fraction);
  read(j, "seed", cfg.seed);
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": malformed JSON: " + e.what());
  }
  RunConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

/// Range checks shared by every subcommand, run before any computation.
inline void validate(const RunConfig& cfg) {
  require(cfg.k >= 1, "k must be >= 1");
  require(cfg.p >= 1.0 && cfg.p <= 3.0, "p must lie in [1, 3]");
  require(cfg.gamma_a >= 0.0 && cfg.gamma_i >= 0.0, "gamma_A and gamma_I must be nonnegative");
  require(cfg.fraction > 0.0 && cfg.fraction <= 1.0, "fraction must lie in (0, 1]");
  const auto& pl = cfg.bench.settings.plap;
  require(pl.embedding_dim >= 0, "embedding dimension must be >= 1 (0 selects the default)");
  require(pl.max_iters >= 0 && pl.rel_tol > 0.0 && pl.step_scale > 0.0, "invalid p-Laplacian solver settings");
  const auto& t = cfg.bench.settings.train;
  require(t.epsilon > 0.0 && t.max_iters >= 0, "invalid trainer settings");
  if (cfg.bench.dataset.synthetic) cfg.bench.dataset.synthetic->validate();
}

inline nlohmann::json to_json(const RunConfig& cfg) {
  const auto& b = cfg.bench;
  nlohmann::json dataset;
  if (b.dataset.synthetic) {
    const auto& s = *b.dataset.synthetic;
    dataset["synthetic"] = {{"classes", s.classes},       {"groups", s.groups},
                            {"points_per_class", s.points_per_class},
                            {"noise", s.noise},           {"dims", s.dims},
                            {"group_spread", s.group_spread}, {"class_spread", s.class_spread},
                            {"elongation", s.elongation}};
  } else {
    dataset["csv"] = b.dataset.csv_path;
  }
  if (!b.dataset.test_csv_path.empty()) dataset["test_csv"] = b.dataset.test_csv_path;
  dataset["test_points_per_class"] = b.dataset.test_points_per_class;
  auto variants = nlohmann::json::array();
  for (auto v : b.variants) variants.push_back(to_string(v));
  const auto& s = b.settings;
  nlohmann::json j{
      {"dataset", dataset},
      {"variants", variants},
      {"fractions", b.fractions},
      {"seeds", b.seeds},
      {"validation", {{"fraction", b.validation_fraction}, {"repeats", b.validation_repeats}}},
      {"grid", {{"p", b.grid.p}, {"gamma_a", b.grid.gamma_a}, {"gamma_i", b.grid.gamma_i}, {"k", b.grid.k}}},
      {"graph", {{"weights", to_string(s.graph.weights)}, {"group_constrained", s.graph.group_constrained}}},
      {"plap",
       {{"embedding_dim", s.plap.embedding_dim},
        {"max_iters", s.plap.max_iters},
        {"rel_tol", s.plap.rel_tol},
        {"step_scale", s.plap.step_scale},
        {"max_halvings", s.plap.max_halvings},
        {"init", to_string(s.init)}}},
      {"train", {{"epsilon", s.train.epsilon}, {"max_iters", s.train.max_iters}}},
      {"output_dir", b.output_dir},
      {"variant", to_string(cfg.variant)},
      {"k", cfg.k},
      {"p", cfg.p},
      {"gamma_a", cfg.gamma_a},
      {"gamma_i", cfg.gamma_i},
      {"fraction", cfg.fraction},
      {"seed", cfg.seed}};
  j["kernel"] = s.kernel ? to_json(*s.kernel) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const SolverReport& r) {
  return {{"iterations", r.iterations},
          {"initial_objective", r.initial_objective},
          {"final_objective", r.final_objective},
          {"converged", r.converged},
          {"stop_reason", r.stop_reason},
          {"orthonormality_error", r.orthonormality_error}};
}

inline nlohmann::json to_json(const MetricReport& m) {
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [cls, ap] : m.per_class_ap) per_class[std::to_string(cls)] = ap;
  nlohmann::json j{{"variant", m.variant}, {"evaluation", m.evaluation}, {"per_class_ap", per_class}};
  j["map"] = std::isfinite(m.map) ? nlohmann::json(m.map) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json version_info() {
  return {{"hplap", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"compiler", __VERSION__},
          {"model_format_version", kModelFormatVersion}};
}

/// Writes every benchmark artifact into cfg.bench.output_dir.
inline void write_benchmark_outputs(const RunConfig& cfg, const BenchmarkResult& r) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.bench.output_dir);
  fs::create_directories(dir);
  detail::write_text(dir / "map_by_fraction.csv", map_by_fraction_csv(cfg.bench, r));
  detail::write_text(dir / "map_by_seed.csv", map_by_seed_csv(r));
  detail::write_text(dir / "ap_by_class.csv", ap_by_class_csv(cfg.bench, r));
  detail::write_text(dir / "p_sweep.csv", p_sweep_csv(cfg.bench, r));
  detail::write_text(dir / "grid_search.csv", grid_search_csv(r));
  detail::write_text(dir / "selected_hyperparams.csv", selected_csv(r));
  bool inductive = false;
  for (const auto& e : r.evaluations) inductive = inductive || e.inductive.has_value();
  if (inductive)
    detail::write_text(dir / "map_by_fraction_inductive.csv", map_by_fraction_csv(cfg.bench, r, "inductive"));
  const nlohmann::json manifest{{"config", to_json(cfg)},
                                {"seeds", cfg.bench.seeds},
                                {"validation_seed_offset", kValidationSeedOffset},
                                {"versions", version_info()}};
  detail::write_text(dir / "run_manifest.json", manifest.dump(2) + "\n");
}

}  // namespace hplap

#endif  // HPLAP_CONFIG_HPP_
