#ifndef HPLAP_SSL_MODEL_HPP_
#define HPLAP_SSL_MODEL_HPP_

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hplap/error.hpp"
#include "hplap/feature_table.hpp"
#include "hplap/kernel.hpp"

namespace hplap {

/// Gram matrix K, regularizer L and the product K L K, shared read-only by
/// every binary subproblem and gamma candidate.
struct RegularizedKernel {
  Eigen::MatrixXd gram;
  Eigen::MatrixXd regularizer;
  Eigen::MatrixXd klk;

  RegularizedKernel(Eigen::MatrixXd gram_in, const Eigen::MatrixXd& regularizer_in)
      : gram(std::move(gram_in)) {
    const auto n = gram.rows();
    require(gram.cols() == n, "Gram matrix must be square");
    require(regularizer_in.rows() == n && regularizer_in.cols() == n,
            "regularizer size does not match the Gram matrix");
    const double gscale = std::max(1.0, gram.cwiseAbs().maxCoeff());
    require((gram - gram.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * gscale,
            "Gram matrix must be symmetric");
    const double rscale = std::max(1.0, regularizer_in.cwiseAbs().maxCoeff());
    require((regularizer_in - regularizer_in.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * rscale,
            "regularizer must be symmetric");
    require(gram.allFinite() && regularizer_in.allFinite(), "Gram/regularizer must be finite");
    regularizer = 0.5 * (regularizer_in + regularizer_in.transpose());
    const Eigen::MatrixXd m = gram * regularizer * gram;
    klk = 0.5 * (m + m.transpose());
  }

  Eigen::Index size() const { return gram.rows(); }
};

inline std::shared_ptr<const RegularizedKernel> make_regularized_kernel(Eigen::MatrixXd gram,
                                                                        const Eigen::MatrixXd& regularizer) {
  return std::make_shared<const RegularizedKernel>(std::move(gram), regularizer);
}

/// One binary manifold-regularized logistic problem over l labeled and u
/// unlabeled points.
class SSLProblem {
 public:
  SSLProblem(std::shared_ptr<const RegularizedKernel> matrices, std::vector<Eigen::Index> labeled,
             std::vector<double> labels, double gamma_a, double gamma_i)
      : m_(std::move(matrices)),
        labeled_(std::move(labeled)),
        labels_(std::move(labels)),
        gamma_a_(gamma_a),
        gamma_i_(gamma_i) {
    require(m_ != nullptr, "missing Gram/regularizer matrices");
    require(!labeled_.empty(), "at least one labeled point required");
    require(labeled_.size() == labels_.size(), "one label per labeled index required");
    require(static_cast<Eigen::Index>(labeled_.size()) <= m_->size(), "more labels than points");
    std::set<Eigen::Index> seen;
    for (std::size_t i = 0; i < labeled_.size(); ++i) {
      require(labeled_[i] >= 0 && labeled_[i] < m_->size(), "labeled index out of range");
      require(seen.insert(labeled_[i]).second, "labeled indices must be distinct");
      require(labels_[i] == 1.0 || labels_[i] == -1.0, "labels must be +1 or -1");
    }
    require(std::isfinite(gamma_a_) && gamma_a_ >= 0.0, "gamma_A must be nonnegative");
    require(std::isfinite(gamma_i_) && gamma_i_ >= 0.0, "gamma_I must be nonnegative");
  }

  Eigen::Index size() const { return m_->size(); }
  std::size_t num_labeled() const { return labeled_.size(); }
  const std::vector<Eigen::Index>& labeled() const { return labeled_; }
  const std::vector<double>& labels() const { return labels_; }
  double gamma_a() const { return gamma_a_; }
  double gamma_i() const { return gamma_i_; }
  const RegularizedKernel& matrices() const { return *m_; }

  /// gamma_I / (l+u)^2
  double intrinsic_weight() const {
    const double n = static_cast<double>(size());
    return gamma_i_ / (n * n);
  }

 private:
  std::shared_ptr<const RegularizedKernel> m_;
  std::vector<Eigen::Index> labeled_;
  std::vector<double> labels_;
  double gamma_a_;
  double gamma_i_;
};

/// log(1 + e^z) without overflow.
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// 1 / (1 + e^{-z})
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// (1/l) sum log(1 + exp(-y_i K_i alpha)) + gamma_A a^T K a + gamma_I/(l+u)^2 a^T K L K a
inline double objective(const Eigen::VectorXd& alpha, const SSLProblem& prob) {
  require(alpha.size() == prob.size(), "alpha length must equal l+u");
  const auto& m = prob.matrices();
  const Eigen::VectorXd ka = m.gram * alpha;
  double data = 0.0;
  for (std::size_t i = 0; i < prob.num_labeled(); ++i)
    data += softplus(-prob.labels()[i] * ka(prob.labeled()[i]));
  data /= static_cast<double>(prob.num_labeled());
  const double ambient = prob.gamma_a() * alpha.dot(ka);
  const double intrinsic = prob.intrinsic_weight() * alpha.dot(m.klk * alpha);
  return data + ambient + intrinsic;
}

/// Exact gradient of `objective`; with symmetric K and L the quadratic
/// terms are 2 gamma_A K a and 2 gamma_I/(l+u)^2 K L K a.
inline Eigen::VectorXd gradient(const Eigen::VectorXd& alpha, const SSLProblem& prob) {
  require(alpha.size() == prob.size(), "alpha length must equal l+u");
  const auto& m = prob.matrices();
  const Eigen::VectorXd ka = m.gram * alpha;
  Eigen::VectorXd g = 2.0 * prob.gamma_a() * ka + 2.0 * prob.intrinsic_weight() * (m.klk * alpha);
  const double inv_l = 1.0 / static_cast<double>(prob.num_labeled());
  for (std::size_t i = 0; i < prob.num_labeled(); ++i) {
    const double y = prob.labels()[i];
    const auto row = prob.labeled()[i];
    g -= inv_l * y * sigmoid(-y * ka(row)) * m.gram.col(row);
  }
  return g;
}

/// d^T H(alpha) d, used to size the first line-search trial.
inline double curvature(const Eigen::VectorXd& alpha, const Eigen::VectorXd& d, const SSLProblem& prob) {
  const auto& m = prob.matrices();
  const Eigen::VectorXd ka = m.gram * alpha;
  const Eigen::VectorXd kd = m.gram * d;
  double data = 0.0;
  for (std::size_t i = 0; i < prob.num_labeled(); ++i) {
    const auto row = prob.labeled()[i];
    const double s = sigmoid(prob.labels()[i] * ka(row));
    data += s * (1.0 - s) * kd(row) * kd(row);
  }
  data /= static_cast<double>(prob.num_labeled());
  return data + 2.0 * prob.gamma_a() * d.dot(kd) + 2.0 * prob.intrinsic_weight() * d.dot(m.klk * d);
}

struct TrainOptions {
  double epsilon = 1e-8;
  int max_iters = 5000;
  double armijo_c = 1e-4;
  int max_backtracks = 60;
};

struct TrainReport {
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  std::vector<double> objective_history;
};

struct Solution {
  Eigen::VectorXd alpha;
  TrainReport report;
};

/// Fletcher-Reeves nonlinear conjugate gradient from alpha = 0 with an
/// Armijo backtracking line search. Stops when |f(a_{m+1}) - f(a_m)| <= epsilon.
inline Solution train(const SSLProblem& prob, const TrainOptions& opts = {}) {
  require(opts.epsilon > 0.0, "epsilon must be positive");
  require(opts.max_iters >= 0, "max_iters must be nonnegative");
  Solution out;
  auto& rep = out.report;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(prob.size());
  double f = objective(alpha, prob);
  Eigen::VectorXd g = gradient(alpha, prob);
  Eigen::VectorXd d = -g;
  rep.initial_objective = f;
  rep.objective_history.push_back(f);

  for (int m = 0; m < opts.max_iters; ++m) {
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) {
      rep.converged = true;
      break;
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      d = -g;
      slope = -g2;
      ++rep.restarts;
    }

    std::optional<double> step;
    for (int attempt = 0; attempt < 2 && !step; ++attempt) {
      const double hdd = curvature(alpha, d, prob);
      double delta = (hdd > 0.0 && std::isfinite(hdd)) ? -slope / hdd : 1.0;
      for (int b = 0; b <= opts.max_backtracks; ++b, delta *= 0.5) {
        const double trial = objective(alpha + delta * d, prob);
        if (std::isfinite(trial) && trial <= f + opts.armijo_c * delta * slope) {
          step = delta;
          break;
        }
      }
      if (!step && slope != -g2) {
        d = -g;
        slope = -g2;
        ++rep.restarts;
      } else if (!step) {
        break;
      }
    }
    if (!step) {
      // No Armijo step even along -g: stationary at working precision.
      rep.converged = true;
      break;
    }

    alpha += *step * d;
    const double f_next = objective(alpha, prob);
    const Eigen::VectorXd g_next = gradient(alpha, prob);
    d = -g_next + (g_next.squaredNorm() / g2) * d;
    const double change = std::abs(f_next - f);
    f = f_next;
    g = g_next;
    rep.iterations = m + 1;
    rep.objective_history.push_back(f);
    if (change <= opts.epsilon) {
      rep.converged = true;
      break;
    }
  }
  rep.final_objective = f;
  out.alpha = std::move(alpha);
  return out;
}

struct Hyperparams {
  std::string variant;
  double gamma_a = 0.0;
  double gamma_i = 0.0;
  double p = 2.0;
  long k = 0;
  long embedding_dim = 0;
};

/// Representer expansion f(x) = sum_i alpha_i K(x_i, x) over all l+u points.
struct TrainedModel {
  Eigen::VectorXd alpha;
  KernelSpec kernel;
  Eigen::MatrixXd training_features;
  Hyperparams hyperparams;
  TrainReport report;
};

inline double predict(const TrainedModel& model, const Eigen::VectorXd& x) {
  require(x.size() == model.training_features.cols(),
          "query has " + std::to_string(x.size()) + " features, model expects " +
              std::to_string(model.training_features.cols()));
  double s = 0.0;
  for (Eigen::Index i = 0; i < model.training_features.rows(); ++i)
    s += model.alpha(i) * model.kernel(model.training_features.row(i), x.transpose());
  return s;
}

inline Eigen::VectorXd predict(const TrainedModel& model, const Eigen::MatrixXd& queries) {
  require(queries.cols() == model.training_features.cols(), "feature dimension mismatch");
  return cross_gram(queries, model.training_features, model.kernel) * model.alpha;
}

struct OneVsRestModel {
  std::vector<int> classes;
  std::vector<TrainedModel> models;
  std::vector<std::string> warnings;

  /// queries x classes score matrix.
  Eigen::MatrixXd scores(const Eigen::MatrixXd& queries) const {
    Eigen::MatrixXd out(queries.rows(), static_cast<Eigen::Index>(models.size()));
    if (models.empty()) return out;
    const Eigen::MatrixXd k = cross_gram(queries, models.front().training_features, models.front().kernel);
    for (std::size_t c = 0; c < models.size(); ++c)
      out.col(static_cast<Eigen::Index>(c)) = k * models[c].alpha;
    return out;
  }

  /// Scores on the training points themselves, K alpha per class.
  Eigen::MatrixXd training_scores(const Eigen::MatrixXd& gram) const {
    Eigen::MatrixXd out(gram.rows(), static_cast<Eigen::Index>(models.size()));
    for (std::size_t c = 0; c < models.size(); ++c)
      out.col(static_cast<Eigen::Index>(c)) = gram * models[c].alpha;
    return out;
  }
};

/// One binary model per class (that class +1, the rest -1), all sharing the
/// same Gram and regularizer. `classes` lists every class expected; those
/// without a labeled example are skipped with a warning.
inline OneVsRestModel train_one_vs_rest(const Eigen::MatrixXd& features,
                                        const std::vector<std::optional<int>>& class_labels,
                                        const std::vector<Eigen::Index>& labeled,
                                        std::shared_ptr<const RegularizedKernel> matrices,
                                        const KernelSpec& kernel, const Hyperparams& hp,
                                        const std::vector<int>& classes, const TrainOptions& opts = {}) {
  require(matrices && matrices->size() == features.rows(), "Gram size does not match features");
  std::set<int> labeled_classes;
  std::vector<int> y;
  for (auto i : labeled) {
    require(i >= 0 && i < features.rows(), "labeled index out of range");
    const auto& c = class_labels[static_cast<std::size_t>(i)];
    require(c.has_value(), "labeled index " + std::to_string(i) + " has no class label");
    labeled_classes.insert(*c);
    y.push_back(*c);
  }
  require(labeled_classes.size() >= 2, "one-vs-rest needs at least 2 classes among labeled points");

  OneVsRestModel out;
  for (int cls : classes) {
    if (!labeled_classes.count(cls)) {
      out.warnings.push_back("class " + std::to_string(cls) + " has no labeled examples; skipped");
      continue;
    }
    std::vector<double> binary(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) binary[i] = y[i] == cls ? 1.0 : -1.0;
    const SSLProblem prob(matrices, labeled, std::move(binary), hp.gamma_a, hp.gamma_i);
    auto sol = train(prob, opts);
    out.classes.push_back(cls);
    out.models.push_back({std::move(sol.alpha), kernel, features, hp, std::move(sol.report)});
  }
  return out;
}

}  // namespace hplap

#endif  // HPLAP_SSL_MODEL_HPP_
