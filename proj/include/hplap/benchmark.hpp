#ifndef HPLAP_BENCHMARK_HPP_
#define HPLAP_BENCHMARK_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hplap/csv.hpp"
#include "hplap/error.hpp"
#include "hplap/experiment.hpp"

namespace hplap {

/// Either a synthetic generator or a labeled feature CSV (plus an optional
/// inductive test CSV).
struct DatasetConfig {
  std::optional<SyntheticSpec> synthetic;
  int test_points_per_class = 0;
  std::string csv_path;
  std::string test_csv_path;
};

struct BenchmarkConfig {
  DatasetConfig dataset;
  std::vector<Variant> variants = {Variant::lapr, Variant::plapr, Variant::hlapr, Variant::hplapr};
  std::vector<double> fractions = {0.10, 0.20, 0.30, 0.50};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  double validation_fraction = 0.10;
  int validation_repeats = 1;
  GridSpec grid;
  ExperimentSettings settings;
  std::string output_dir = "out";

  void validate() const {
    require(!variants.empty(), "benchmark needs at least one variant");
    require(!fractions.empty(), "benchmark needs at least one labeled fraction");
    for (double f : fractions) require(f > 0.0 && f <= 1.0, "labeled fractions must lie in (0, 1]");
    require(!seeds.empty(), "benchmark needs at least one seed");
    require(validation_fraction > 0.0 && validation_fraction <= 1.0, "validation fraction must lie in (0, 1]");
    require(validation_repeats >= 1, "validation repeats must be positive");
    require(dataset.synthetic.has_value() != !dataset.csv_path.empty(),
            "dataset must name exactly one of a synthetic spec or a CSV path");
    grid.validate();
  }
};

/// Validation splits come from a stream offset from the evaluation seed so
/// that model selection and scoring never share a labeled subset draw.
inline constexpr std::uint64_t kValidationSeedOffset = 7919;

struct Dataset {
  FeatureTable pool;
  std::optional<FeatureTable> test;
};

inline Dataset load_dataset(const DatasetConfig& cfg, std::uint64_t seed) {
  Dataset out;
  if (cfg.synthetic) {
    SyntheticSpec spec = *cfg.synthetic;
    spec.seed = seed;
    const int train_per_class = spec.points_per_class;
    spec.points_per_class += cfg.test_points_per_class;
    const FeatureTable all = make_synthetic(spec);
    std::vector<std::size_t> pool_rows, test_rows;
    for (std::size_t i = 0; i < all.rows(); ++i)
      (static_cast<int>(i) % spec.points_per_class < train_per_class ? pool_rows : test_rows).push_back(i);
    out.pool = all.select(pool_rows);
    if (!test_rows.empty()) out.test = all.select(test_rows);
  } else {
    out.pool = csv::read_features(cfg.csv_path);
    if (!cfg.test_csv_path.empty()) out.test = csv::read_features(cfg.test_csv_path);
  }
  return out;
}

struct EvaluationRecord {
  std::uint64_t seed = 0;
  Variant variant{};
  double fraction = 0.0;
  GridPoint hyperparams;
  MetricReport transductive;
  std::optional<MetricReport> inductive;
};

struct BenchmarkResult {
  std::vector<EvaluationRecord> evaluations;
  std::map<std::pair<std::uint64_t, int>, CrossValidation> cross_validation;  // (seed, variant)
};

/// variant x seed: pick hyperparameters on validation splits, then score every
/// labeled fraction on evaluation splits. All variants share each seed's
/// pool, splits, Gram matrix and kernel.
inline BenchmarkResult run_benchmark(const BenchmarkConfig& cfg) {
  cfg.validate();
  BenchmarkResult result;
  for (auto seed : cfg.seeds) {
    const Dataset data = load_dataset(cfg.dataset, seed);
    require(data.pool.fully_labeled(), "benchmark pool rows must all carry class labels");
    RegularizerCache cache(data.pool, cfg.settings);
    const auto validation =
        split_labels(data.pool, {cfg.validation_fraction, seed + kValidationSeedOffset, cfg.validation_repeats});
    std::map<double, Split> eval_splits;
    for (double f : cfg.fractions) eval_splits[f] = split_labels(data.pool, {f, seed, 1}).front();

    const Eigen::Index n = static_cast<Eigen::Index>(data.pool.rows());
    const Eigen::Index embedding_dim =
        cfg.settings.plap.embedding_dim == 0 ? default_embedding_dim(n) : cfg.settings.plap.embedding_dim;
    for (auto variant : cfg.variants) {
      auto cv = cross_validate(cache, data.pool, validation, cfg.grid, variant, cfg.settings);
      const auto matrices = cache.get(variant, cv.best.k.value_or(0), cv.best.p.value_or(2.0));
      const auto hp = to_hyperparams(variant, cv.best, embedding_dim);
      for (const auto& [fraction, split] : eval_splits) {
        auto fit = fit_and_evaluate(data.pool, split, matrices, cache.kernel(), hp, cfg.settings.train,
                                    data.test ? &*data.test : nullptr);
        result.evaluations.push_back(
            {seed, variant, fraction, cv.best, std::move(fit.transductive), std::move(fit.inductive)});
      }
      result.cross_validation.emplace(std::make_pair(seed, static_cast<int>(variant)), std::move(cv));
    }
  }
  return result;
}

namespace detail {

inline std::string opt_str(const std::optional<double>& v) { return v ? csv::format_double(*v) : ""; }
inline std::string opt_str(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : ""; }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path.string());
  out << text;
}

inline std::string csv_safe(std::string s) {
  for (auto& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

}  // namespace detail

/// map_by_fraction.csv: mean transductive mAP over seeds, rows = fraction.
inline std::string map_by_fraction_csv(const BenchmarkConfig& cfg, const BenchmarkResult& r,
                                       const std::string& evaluation = "transductive") {
  std::ostringstream out;
  out << "fraction";
  for (auto v : cfg.variants) out << ',' << to_string(v);
  out << '\n';
  std::set<double> fractions(cfg.fractions.begin(), cfg.fractions.end());
  for (double f : fractions) {
    out << csv::format_double(f);
    for (auto v : cfg.variants) {
      std::vector<double> maps;
      for (const auto& e : r.evaluations) {
        if (e.variant != v || e.fraction != f) continue;
        const MetricReport* m = evaluation == "inductive" ? (e.inductive ? &*e.inductive : nullptr) : &e.transductive;
        if (m) maps.push_back(m->map);
      }
      out << ',' << csv::format_double(detail::mean(maps));
    }
    out << '\n';
  }
  return out.str();
}

/// map_by_seed.csv: one row per (seed, fraction, variant, evaluation).
inline std::string map_by_seed_csv(const BenchmarkResult& r) {
  std::ostringstream out;
  out << "seed,fraction,variant,evaluation,map\n";
  for (const auto& e : r.evaluations) {
    out << e.seed << ',' << csv::format_double(e.fraction) << ',' << to_string(e.variant)
        << ",transductive," << csv::format_double(e.transductive.map) << '\n';
    if (e.inductive)
      out << e.seed << ',' << csv::format_double(e.fraction) << ',' << to_string(e.variant) << ",inductive,"
          << csv::format_double(e.inductive->map) << '\n';
  }
  return out.str();
}

/// ap_by_class.csv: mean transductive AP over seeds per (variant, fraction, class).
inline std::string ap_by_class_csv(const BenchmarkConfig& cfg, const BenchmarkResult& r) {
  std::map<std::tuple<int, double, int>, std::vector<double>> acc;
  for (const auto& e : r.evaluations)
    for (const auto& [cls, ap] : e.transductive.per_class_ap)
      acc[{static_cast<int>(e.variant), e.fraction, cls}].push_back(ap);
  std::ostringstream out;
  out << "variant,fraction,class,ap\n";
  for (auto v : cfg.variants)
    for (const auto& [key, aps] : acc) {
      if (std::get<0>(key) != static_cast<int>(v)) continue;
      out << to_string(v) << ',' << csv::format_double(std::get<1>(key)) << ',' << std::get<2>(key) << ','
          << csv::format_double(detail::mean(aps)) << '\n';
    }
  return out.str();
}

/// p_sweep.csv: validation mAP against p (best over the other coordinates,
/// averaged over seeds) for p-dependent variants; `best` flags the argmax.
inline std::string p_sweep_csv(const BenchmarkConfig& cfg, const BenchmarkResult& r) {
  std::ostringstream out;
  out << "variant,p,map,best\n";
  for (auto v : cfg.variants) {
    if (!uses_p(v)) continue;
    std::map<double, std::vector<double>> per_p;
    for (const auto& [key, cv] : r.cross_validation) {
      if (key.second != static_cast<int>(v)) continue;
      std::map<double, double> best_at;
      for (const auto& row : cv.rows) {
        if (!row.ok || !row.point.p) continue;
        auto [it, inserted] = best_at.emplace(*row.point.p, row.map);
        if (!inserted) it->second = std::max(it->second, row.map);
      }
      for (const auto& [p, m] : best_at) per_p[p].push_back(m);
    }
    double best_p = std::nan(""), best_map = -1.0;
    for (const auto& [p, maps] : per_p)
      if (detail::mean(maps) > best_map) {
        best_map = detail::mean(maps);
        best_p = p;
      }
    for (const auto& [p, maps] : per_p)
      out << to_string(v) << ',' << csv::format_double(p) << ',' << csv::format_double(detail::mean(maps)) << ','
          << (p == best_p ? 1 : 0) << '\n';
  }
  return out.str();
}

/// grid_search.csv: every validated grid point.
inline std::string grid_search_csv(const BenchmarkResult& r) {
  std::ostringstream out;
  out << "seed,variant,k,p,gamma_a,gamma_i,map,status\n";
  for (const auto& [key, cv] : r.cross_validation)
    for (const auto& row : cv.rows)
      out << key.first << ',' << to_string(cv.variant) << ',' << detail::opt_str(row.point.k) << ','
          << detail::opt_str(row.point.p) << ',' << csv::format_double(row.point.gamma_a) << ','
          << csv::format_double(row.point.gamma_i) << ','
          << (row.ok ? csv::format_double(row.map) : std::string()) << ','
          << (row.ok ? std::string("ok") : "failed: " + detail::csv_safe(row.error)) << '\n';
  return out.str();
}

/// selected_hyperparams.csv: the cross-validated choice per (seed, variant).
inline std::string selected_csv(const BenchmarkResult& r) {
  std::ostringstream out;
  out << "seed,variant,k,p,gamma_a,gamma_i,validation_map\n";
  for (const auto& [key, cv] : r.cross_validation)
    out << key.first << ',' << to_string(cv.variant) << ',' << detail::opt_str(cv.best.k) << ','
        << detail::opt_str(cv.best.p) << ',' << csv::format_double(cv.best.gamma_a) << ','
        << csv::format_double(cv.best.gamma_i) << ',' << csv::format_double(cv.best_map) << '\n';
  return out.str();
}

}  // namespace hplap

#endif  // HPLAP_BENCHMARK_HPP_
