#ifndef HPLAP_EXPERIMENT_HPP_
#define HPLAP_EXPERIMENT_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "hplap/error.hpp"
#include "hplap/feature_table.hpp"
#include "hplap/graph.hpp"
#include "hplap/kernel.hpp"
#include "hplap/metrics.hpp"
#include "hplap/plap_eigen.hpp"
#include "hplap/splits.hpp"
#include "hplap/ssl_model.hpp"
#include "hplap/synthetic.hpp"

namespace hplap {

/// Which regularizer feeds the trainer. `supervised` drops the intrinsic
/// term entirely (gamma_I forced to 0) and serves as the baseline.
enum class Variant { lapr, plapr, hlapr, hplapr, supervised };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::lapr: return "lapr";
    case Variant::plapr: return "plapr";
    case Variant::hlapr: return "hlapr";
    case Variant::hplapr: return "hplapr";
    case Variant::supervised: return "supervised";
  }
  return "?";
}

inline Variant parse_variant(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  for (auto v : {Variant::lapr, Variant::plapr, Variant::hlapr, Variant::hplapr, Variant::supervised})
    if (name == to_string(v)) return v;
  throw Error("unknown variant '" + name + "' (expected lapr, plapr, hlapr, hplapr or supervised)");
}

inline bool uses_p(Variant v) { return v == Variant::plapr || v == Variant::hplapr; }
inline bool uses_graph(Variant v) { return v != Variant::supervised; }
inline bool uses_hypergraph(Variant v) { return v == Variant::hlapr || v == Variant::hplapr; }

/// Operator whose eigenvectors seed the p-Laplacian iteration: the normalized
/// Laplacian of the same (hyper)graph, or the unnormalized D - W.
enum class InitLaplacian { normalized, unnormalized };

struct GraphOptions {
  WeightPolicy weights = WeightPolicy::gaussian;
  bool group_constrained = false;
};

struct ExperimentSettings {
  GraphOptions graph;
  PLapConfig plap;  // plap.p is overridden per grid point
  InitLaplacian init = InitLaplacian::normalized;
  std::optional<KernelSpec> kernel;  // rbf_auto on the pool when unset
  TrainOptions train;
};

struct Regularizer {
  Eigen::MatrixXd matrix;
  std::optional<SolverReport> report;
};

/// LapR: normalized simple-graph Laplacian. HLapR: normalized hypergraph
/// Laplacian. pLapR / HpLapR: approximate p-Laplacian over the kNN graph
/// weights / the hypergraph adjacency.
inline Regularizer build_regularizer(const FeatureTable& pool, Variant variant, std::size_t k, double p,
                                     const ExperimentSettings& settings) {
  const auto n = static_cast<Eigen::Index>(pool.rows());
  switch (variant) {
    case Variant::supervised:
      return {Eigen::MatrixXd::Zero(n, n), std::nullopt};
    case Variant::lapr:
      return {normalized_laplacian(build_knn_graph(pool, k, settings.graph.weights)).matrix, std::nullopt};
    case Variant::hlapr:
      return {hypergraph_laplacian(build_knn_hypergraph(pool, k, settings.graph.weights,
                                                        settings.graph.group_constrained))
                  .matrix,
              std::nullopt};
    case Variant::plapr:
    case Variant::hplapr: {
      WeightedGraph g;
      LaplacianMatrix init;
      if (variant == Variant::plapr) {
        g = build_knn_graph(pool, k, settings.graph.weights);
        init = settings.init == InitLaplacian::normalized ? normalized_laplacian(g) : unnormalized_laplacian(g);
      } else {
        const auto hg = build_knn_hypergraph(pool, k, settings.graph.weights, settings.graph.group_constrained);
        g = hypergraph_adjacency(hg);
        init = settings.init == InitLaplacian::normalized ? hypergraph_laplacian(hg) : unnormalized_laplacian(g);
      }
      PLapConfig cfg = settings.plap;
      cfg.p = p;
      auto result = approximate_p_laplacian(g, init, cfg);
      return {std::move(result.matrix), std::move(result.report)};
    }
  }
  throw Error("unhandled variant");
}

/// Per-class AP of one-vs-rest scores over the given rows.
inline MetricReport score_report(const Eigen::MatrixXd& scores, const std::vector<int>& model_classes,
                                 const std::vector<int>& truth, const std::string& variant,
                                 const std::string& evaluation) {
  require(scores.rows() == static_cast<Eigen::Index>(truth.size()), "one truth label per scored row");
  MetricReport report{variant, evaluation, {}, std::nan("")};
  for (std::size_t c = 0; c < model_classes.size(); ++c) {
    std::vector<double> s(truth.size());
    std::vector<bool> pos(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
      s[i] = scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      pos[i] = truth[i] == model_classes[c];
    }
    if (auto ap = average_precision(s, pos)) report.per_class_ap[model_classes[c]] = *ap;
  }
  report.finalize();
  return report;
}

inline std::vector<int> labels_of(const FeatureTable& t, const std::vector<Eigen::Index>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (auto r : rows) {
    const auto& c = t.class_labels[static_cast<std::size_t>(r)];
    require(c.has_value(), "evaluation row " + std::to_string(r) + " has no class label");
    out.push_back(*c);
  }
  return out;
}

struct FitResult {
  OneVsRestModel model;
  MetricReport transductive;
  std::optional<MetricReport> inductive;
};

/// Train one-vs-rest on the split's labeled rows and score the unlabeled rows
/// (and `test`, when given).
inline FitResult fit_and_evaluate(const FeatureTable& pool, const Split& split,
                                  std::shared_ptr<const RegularizedKernel> matrices, const KernelSpec& kernel,
                                  const Hyperparams& hp, const TrainOptions& opts,
                                  const FeatureTable* test = nullptr) {
  Hyperparams effective = hp;
  if (effective.variant == to_string(Variant::supervised)) effective.gamma_i = 0.0;
  FitResult out;
  out.model = train_one_vs_rest(pool.features, pool.class_labels, split.labeled, matrices, kernel, effective,
                                pool.classes(), opts);
  const Eigen::MatrixXd all_scores = out.model.training_scores(matrices->gram);
  Eigen::MatrixXd unlabeled_scores(static_cast<Eigen::Index>(split.unlabeled.size()), all_scores.cols());
  for (std::size_t i = 0; i < split.unlabeled.size(); ++i)
    unlabeled_scores.row(static_cast<Eigen::Index>(i)) = all_scores.row(split.unlabeled[i]);
  out.transductive = score_report(unlabeled_scores, out.model.classes, labels_of(pool, split.unlabeled),
                                  hp.variant, "transductive");
  if (test != nullptr) {
    std::vector<Eigen::Index> rows(test->rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<Eigen::Index>(i);
    out.inductive = score_report(out.model.scores(test->features), out.model.classes, labels_of(*test, rows),
                                 hp.variant, "inductive");
  }
  return out;
}

/// Regularized-kernel matrices for one pool, keyed by (variant, k, p).
class RegularizerCache {
 public:
  RegularizerCache(const FeatureTable& pool, const ExperimentSettings& settings)
      : pool_(pool), settings_(settings) {
    kernel_ = settings.kernel ? *settings.kernel : KernelSpec::rbf_auto(pool.features);
    gram_ = gram_matrix(pool.features, kernel_);
  }

  const KernelSpec& kernel() const { return kernel_; }
  const Eigen::MatrixXd& gram() const { return gram_; }

  std::shared_ptr<const RegularizedKernel> get(Variant v, std::size_t k, double p) {
    const auto key = std::make_tuple(static_cast<int>(v), uses_graph(v) ? k : 0, uses_p(v) ? p : 0.0);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
    auto reg = build_regularizer(pool_, v, k, p, settings_);
    if (reg.report) reports_[key] = *reg.report;
    auto m = make_regularized_kernel(gram_, reg.matrix);
    entries_.emplace(key, m);
    return m;
  }

  std::optional<SolverReport> report(Variant v, std::size_t k, double p) const {
    const auto key = std::make_tuple(static_cast<int>(v), uses_graph(v) ? k : 0, uses_p(v) ? p : 0.0);
    auto it = reports_.find(key);
    if (it == reports_.end()) return std::nullopt;
    return it->second;
  }

 private:
  using Key = std::tuple<int, std::size_t, double>;
  const FeatureTable& pool_;
  ExperimentSettings settings_;
  KernelSpec kernel_;
  Eigen::MatrixXd gram_;
  std::map<Key, std::shared_ptr<const RegularizedKernel>> entries_;
  std::map<Key, SolverReport> reports_;
};

inline std::vector<double> decade_grid(int lo, int hi) {
  std::vector<double> g;
  for (int i = lo; i <= hi; ++i) g.push_back(std::pow(10.0, i));
  return g;
}

struct GridSpec {
  std::vector<double> p = {1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0,
                           2.1, 2.2, 2.3, 2.4, 2.5, 2.6, 2.7, 2.8, 2.9, 3.0};
  std::vector<double> gamma_a = decade_grid(-10, 10);
  std::vector<double> gamma_i = decade_grid(-10, 10);
  std::vector<std::size_t> k = {5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};

  void validate() const {
    require(!p.empty() && !gamma_a.empty() && !gamma_i.empty() && !k.empty(), "grids must be nonempty");
    for (double v : p) require(v >= 1.0, "grid p values must be >= 1");
    for (double v : gamma_a) require(v >= 0.0, "grid gamma_A values must be nonnegative");
    for (double v : gamma_i) require(v >= 0.0, "grid gamma_I values must be nonnegative");
    for (auto v : k) require(v >= 1, "grid k values must be >= 1");
  }
};

/// One grid coordinate. k and p are absent for variants that ignore them.
struct GridPoint {
  std::optional<std::size_t> k;
  std::optional<double> p;
  double gamma_a = 0.0;
  double gamma_i = 0.0;
};

struct GridRow {
  GridPoint point;
  double map = std::nan("");
  bool ok = false;
  std::string error;
};

struct CrossValidation {
  Variant variant{};
  GridPoint best;
  double best_map = std::nan("");
  std::vector<GridRow> rows;  // sorted by (k, p, gamma_a, gamma_i)
};

inline Hyperparams to_hyperparams(Variant v, const GridPoint& pt, Eigen::Index embedding_dim) {
  Hyperparams hp;
  hp.variant = to_string(v);
  hp.gamma_a = pt.gamma_a;
  hp.gamma_i = pt.gamma_i;
  hp.p = pt.p.value_or(2.0);
  hp.k = pt.k ? static_cast<long>(*pt.k) : 0;
  hp.embedding_dim = uses_p(v) ? static_cast<long>(embedding_dim) : 0;
  return hp;
}

/// Grid search scored by mean transductive mAP over `splits`. Argmax wins;
/// exact ties go to smaller gamma_I, then p, then k, then gamma_A.
inline CrossValidation cross_validate(RegularizerCache& cache, const FeatureTable& pool,
                                      const std::vector<Split>& splits, const GridSpec& grid, Variant variant,
                                      const ExperimentSettings& settings) {
  grid.validate();
  require(!splits.empty(), "cross-validation needs at least one split");
  std::vector<std::optional<std::size_t>> ks;
  if (uses_graph(variant))
    for (auto k : grid.k) ks.emplace_back(k);
  else
    ks.emplace_back(std::nullopt);
  std::vector<std::optional<double>> ps;
  if (uses_p(variant))
    for (auto p : grid.p) ps.emplace_back(p);
  else
    ps.emplace_back(std::nullopt);
  const std::vector<double> gis = uses_graph(variant) ? grid.gamma_i : std::vector<double>{0.0};

  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  const auto gamma_as = sorted(grid.gamma_a);
  const auto gamma_is = sorted(gis);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::sort(ps.begin(), ps.end());
  ps.erase(std::unique(ps.begin(), ps.end()), ps.end());

  const Eigen::Index n = static_cast<Eigen::Index>(pool.rows());
  const Eigen::Index embedding_dim = settings.plap.embedding_dim == 0 ? default_embedding_dim(n)
                                                                      : settings.plap.embedding_dim;
  CrossValidation cv;
  cv.variant = variant;
  for (const auto& k : ks)
    for (const auto& p : ps) {
      std::shared_ptr<const RegularizedKernel> matrices;
      std::string build_error;
      try {
        matrices = cache.get(variant, k.value_or(0), p.value_or(2.0));
      } catch (const std::exception& e) {
        build_error = e.what();
      }
      for (double ga : gamma_as)
        for (double gi : gamma_is) {
          GridRow row;
          row.point = {k, p, ga, gi};
          if (!matrices) {
            row.error = build_error;
            cv.rows.push_back(row);
            continue;
          }
          try {
            const auto hp = to_hyperparams(variant, row.point, embedding_dim);
            double sum = 0.0;
            for (const auto& s : splits)
              sum += fit_and_evaluate(pool, s, matrices, cache.kernel(), hp, settings.train).transductive.map;
            row.map = sum / static_cast<double>(splits.size());
            row.ok = std::isfinite(row.map);
            if (!row.ok) row.error = "non-finite mAP";
          } catch (const std::exception& e) {
            row.error = e.what();
          }
          cv.rows.push_back(row);
        }
    }

  const GridRow* best = nullptr;
  auto better = [](const GridRow& a, const GridRow& b) {
    if (a.map != b.map) return a.map > b.map;
    if (a.point.gamma_i != b.point.gamma_i) return a.point.gamma_i < b.point.gamma_i;
    if (a.point.p != b.point.p) return a.point.p < b.point.p;
    if (a.point.k != b.point.k) return a.point.k < b.point.k;
    return a.point.gamma_a < b.point.gamma_a;
  };
  for (const auto& row : cv.rows)
    if (row.ok && (best == nullptr || better(row, *best))) best = &row;
  require(best != nullptr, std::string("every grid point failed for variant ") + to_string(variant));
  cv.best = best->point;
  cv.best_map = best->map;
  return cv;
}

}  // namespace hplap

#endif  // HPLAP_EXPERIMENT_HPP_
