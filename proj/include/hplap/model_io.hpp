#ifndef HPLAP_MODEL_IO_HPP_
#define HPLAP_MODEL_IO_HPP_

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hplap/error.hpp"
#include "hplap/ssl_model.hpp"

namespace hplap {

/// Bumped whenever the model file layout changes.
inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json to_json(const KernelSpec& k) {
  nlohmann::json j{{"kind", k.name()}};
  if (k.kind == KernelSpec::Kind::rbf) j["sigma"] = k.sigma;
  return j;
}

inline KernelSpec kernel_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "rbf") return KernelSpec::rbf(j.at("sigma").get<double>());
  if (kind == "linear") return KernelSpec::linear();
  throw Error("unknown kernel kind '" + kind + "'");
}

inline nlohmann::json to_json(const Hyperparams& hp) {
  return {{"variant", hp.variant}, {"gamma_a", hp.gamma_a}, {"gamma_i", hp.gamma_i},
          {"p", hp.p},             {"k", hp.k},             {"embedding_dim", hp.embedding_dim}};
}

inline Hyperparams hyperparams_from_json(const nlohmann::json& j) {
  Hyperparams hp;
  hp.variant = j.value("variant", std::string());
  hp.gamma_a = j.value("gamma_a", 0.0);
  hp.gamma_i = j.value("gamma_i", 0.0);
  hp.p = j.value("p", 2.0);
  hp.k = j.value("k", 0L);
  hp.embedding_dim = j.value("embedding_dim", 0L);
  return hp;
}

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    require(static_cast<Eigen::Index>(row.size()) == cols, "ragged matrix in model file");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

/// One-vs-rest bundle. Kernel, hyperparameters and training features are
/// shared by the per-class models, so they are stored once.
inline nlohmann::json to_json(const OneVsRestModel& model) {
  require(!model.models.empty(), "cannot serialize an empty model");
  const auto& first = model.models.front();
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["kernel"] = to_json(first.kernel);
  j["hyperparams"] = to_json(first.hyperparams);
  j["training_features"] = matrix_to_json(first.training_features);
  auto classes = nlohmann::json::array();
  for (std::size_t c = 0; c < model.models.size(); ++c)
    classes.push_back({{"class", model.classes[c]},
                       {"alpha", vector_to_json(model.models[c].alpha)},
                       {"iterations", model.models[c].report.iterations},
                       {"converged", model.models[c].report.converged},
                       {"final_objective", model.models[c].report.final_objective}});
  j["models"] = std::move(classes);
  return j;
}

inline OneVsRestModel model_from_json(const nlohmann::json& j) {
  const int version = j.at("format_version").get<int>();
  require(version == kModelFormatVersion, "unsupported model format_version " + std::to_string(version));
  const KernelSpec kernel = kernel_from_json(j.at("kernel"));
  const Hyperparams hp = hyperparams_from_json(j.at("hyperparams"));
  const Eigen::MatrixXd features = matrix_from_json(j.at("training_features"));
  OneVsRestModel out;
  for (const auto& m : j.at("models")) {
    const auto alpha = m.at("alpha").get<std::vector<double>>();
    require(static_cast<Eigen::Index>(alpha.size()) == features.rows(),
            "alpha length does not match the training features");
    TrainedModel tm;
    tm.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
    tm.kernel = kernel;
    tm.training_features = features;
    tm.hyperparams = hp;
    tm.report.iterations = m.value("iterations", 0);
    tm.report.converged = m.value("converged", false);
    tm.report.final_objective = m.value("final_objective", 0.0);
    out.classes.push_back(m.at("class").get<int>());
    out.models.push_back(std::move(tm));
  }
  return out;
}

inline void save_model(const std::string& path, const OneVsRestModel& model) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file: " + path);
  out << to_json(model).dump(1) << '\n';
}

inline OneVsRestModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": malformed model JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace hplap

#endif  // HPLAP_MODEL_IO_HPP_
