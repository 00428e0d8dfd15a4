#ifndef HPLAP_PIPELINE_HPP_
#define HPLAP_PIPELINE_HPP_

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hplap/benchmark.hpp"
#include "hplap/config.hpp"
#include "hplap/csv.hpp"
#include "hplap/experiment.hpp"
#include "hplap/model_io.hpp"

namespace hplap {

/// Error annotated with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : Error("stage " + stage + ": " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

template <typename F>
auto run_stage(const std::string& stage, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

struct PipelineResult {
  Dataset data;
  Split split;
  KernelSpec kernel;
  Hyperparams hyperparams;
  std::optional<SolverReport> plap_report;
  Eigen::MatrixXd gram;
  FitResult fit;
};

/// construct -> approximate p-Laplacian -> train -> evaluate, for one
/// variant and one labeled split.
inline PipelineResult run_pipeline(const RunConfig& cfg) {
  run_stage("config", [&] {
    validate(cfg);
    return 0;
  });
  PipelineResult r;
  r.data = run_stage("dataset", [&] {
    auto d = load_dataset(cfg.bench.dataset, cfg.seed);
    require(d.pool.fully_labeled(), "every pool row needs a class label for evaluation");
    return d;
  });
  r.split = run_stage("split", [&] { return split_labels(r.data.pool, {cfg.fraction, cfg.seed, 1}).front(); });
  RegularizerCache cache = run_stage("kernel", [&] { return RegularizerCache(r.data.pool, cfg.bench.settings); });
  r.kernel = cache.kernel();
  r.gram = cache.gram();
  const auto matrices = run_stage("regularizer", [&] { return cache.get(cfg.variant, cfg.k, cfg.p); });
  r.plap_report = cache.report(cfg.variant, cfg.k, cfg.p);
  const auto n = static_cast<Eigen::Index>(r.data.pool.rows());
  const auto& plap = cfg.bench.settings.plap;
  GridPoint point{cfg.k, cfg.p, cfg.gamma_a, cfg.gamma_i};
  r.hyperparams = to_hyperparams(cfg.variant, point, plap.embedding_dim == 0 ? default_embedding_dim(n)
                                                                               : plap.embedding_dim);
  r.fit = run_stage("train", [&] {
    return fit_and_evaluate(r.data.pool, r.split, matrices, r.kernel, r.hyperparams, cfg.bench.settings.train,
                            r.data.test ? &*r.data.test : nullptr);
  });
  return r;
}

inline void write_pipeline_outputs(const RunConfig& cfg, const PipelineResult& r) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.bench.output_dir);
  fs::create_directories(dir);

  nlohmann::json metrics{{"variant", to_string(cfg.variant)},
                         {"hyperparams", to_json(r.hyperparams)},
                         {"split", {{"fraction", cfg.fraction}, {"seed", cfg.seed},
                                    {"labeled", r.split.labeled.size()}, {"unlabeled", r.split.unlabeled.size()}}},
                         {"transductive", to_json(r.fit.transductive)}};
  metrics["map"] = metrics["transductive"]["map"];
  if (r.fit.inductive) metrics["inductive"] = to_json(*r.fit.inductive);
  detail::write_text(dir / "metrics.json", metrics.dump(2) + "\n");

  std::ostringstream ap;
  ap << "evaluation,class,ap\n";
  for (const auto* m : {&r.fit.transductive, r.fit.inductive ? &*r.fit.inductive : nullptr}) {
    if (!m) continue;
    for (const auto& [cls, v] : m->per_class_ap) ap << m->evaluation << ',' << cls << ',' << csv::format_double(v) << '\n';
  }
  detail::write_text(dir / "ap_by_class.csv", ap.str());

  const Eigen::MatrixXd scores = r.fit.model.training_scores(r.gram);
  std::ostringstream sc;
  sc << "id,label,labeled";
  for (int c : r.fit.model.classes) sc << ",score_" << c;
  sc << '\n';
  std::vector<char> is_labeled(r.data.pool.rows(), 0);
  for (auto i : r.split.labeled) is_labeled[static_cast<std::size_t>(i)] = 1;
  for (std::size_t i = 0; i < r.data.pool.rows(); ++i) {
    sc << r.data.pool.id_of(i) << ',' << *r.data.pool.class_labels[i] << ',' << int(is_labeled[i]);
    for (Eigen::Index c = 0; c < scores.cols(); ++c)
      sc << ',' << csv::format_double(scores(static_cast<Eigen::Index>(i), c));
    sc << '\n';
  }
  detail::write_text(dir / "scores.csv", sc.str());

  nlohmann::json conv;
  conv["plap"] = r.plap_report ? to_json(*r.plap_report) : nlohmann::json(nullptr);
  auto train = nlohmann::json::array();
  for (std::size_t c = 0; c < r.fit.model.models.size(); ++c) {
    const auto& rep = r.fit.model.models[c].report;
    train.push_back({{"class", r.fit.model.classes[c]},
                     {"iterations", rep.iterations},
                     {"restarts", rep.restarts},
                     {"converged", rep.converged},
                     {"final_objective", rep.final_objective}});
  }
  conv["train"] = std::move(train);
  conv["warnings"] = r.fit.model.warnings;
  detail::write_text(dir / "convergence.json", conv.dump(2) + "\n");
  save_model((dir / "model.json").string(), r.fit.model);
}

}  // namespace hplap

#endif  // HPLAP_PIPELINE_HPP_
