#ifndef HPLAP_PLAP_EIGEN_HPP_
#define HPLAP_PLAP_EIGEN_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hplap/error.hpp"
#include "hplap/graph.hpp"

namespace hplap {

/// |x|^{p-1} sign(x), with phi_p(0) = 0 for every p >= 1.
inline double phi_p(double x, double p) {
  if (x == 0.0) return 0.0;
  const double s = x > 0.0 ? 1.0 : -1.0;
  if (p == 2.0) return x;
  if (p == 1.0) return s;
  return s * std::pow(std::abs(x), p - 1.0);
}

inline double abs_pow(double x, double p) {
  const double a = std::abs(x);
  if (p == 2.0) return a * a;
  if (p == 1.0) return a;
  return a == 0.0 ? 0.0 : std::pow(a, p);
}

/// Sparse view of a WeightedGraph's positive upper-triangle entries. Every
/// ordered-pair sum over w_ij is twice the sum over this list.
class PDirichletForm {
 public:
  PDirichletForm(const WeightedGraph& g, double p) : n_(g.size()), p_(p) {
    require(p >= 1.0, "p must be >= 1");
    const auto& w = g.weights();
    for (Eigen::Index i = 0; i < n_; ++i)
      for (Eigen::Index j = i + 1; j < n_; ++j)
        if (w(i, j) > 0.0) edges_.push_back({i, j, w(i, j)});
  }

  double p() const { return p_; }
  Eigen::Index size() const { return n_; }

  /// sum_ij w_ij |f_i - f_j|^p over ordered pairs.
  double energy(const Eigen::Ref<const Eigen::VectorXd>& f) const {
    double sum = 0.0;
    for (const auto& e : edges_) sum += e.w * abs_pow(f(e.i) - f(e.j), p_);
    return 2.0 * sum;
  }

  double norm_pp(const Eigen::Ref<const Eigen::VectorXd>& f) const {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) sum += abs_pow(f(i), p_);
    return sum;
  }

  /// energy(f) / ||f||_p^p, the per-column term of the embedding objective.
  double column_ratio(const Eigen::Ref<const Eigen::VectorXd>& f) const {
    const double den = norm_pp(f);
    require(den > 0.0, "p-Dirichlet ratio undefined for a zero vector");
    return energy(f) / den;
  }

  double objective(const Eigen::MatrixXd& F) const {
    check_shape(F);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < F.cols(); ++k) sum += column_ratio(F.col(k));
    return sum;
  }

  /// d/df_i of energy/||f||_p^p:
  ///   (p / ||f||_p^p) [2 sum_j w_ij phi_p(f_i - f_j) - R phi_p(f_i)]
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& F) const {
    check_shape(F);
    Eigen::MatrixXd grad(F.rows(), F.cols());
    Eigen::VectorXd acc(F.rows());
    for (Eigen::Index k = 0; k < F.cols(); ++k) {
      const auto f = F.col(k);
      const double den = norm_pp(f);
      require(den > 0.0, "embedding column " + std::to_string(k) + " is zero");
      acc.setZero();
      double energy_half = 0.0;
      for (const auto& e : edges_) {
        const double diff = f(e.i) - f(e.j);
        const double phi = phi_p(diff, p_);
        // |x|^p = x * phi_p(x)
        energy_half += e.w * diff * phi;
        acc(e.i) += e.w * phi;
        acc(e.j) -= e.w * phi;
      }
      const double ratio = 2.0 * energy_half / den;
      for (Eigen::Index i = 0; i < F.rows(); ++i)
        grad(i, k) = (p_ / den) * (2.0 * acc(i) - ratio * phi_p(f(i), p_));
    }
    return grad;
  }

 private:
  struct Edge {
    Eigen::Index i, j;
    double w;
  };

  void check_shape(const Eigen::MatrixXd& F) const {
    require(F.rows() == n_, "embedding has " + std::to_string(F.rows()) + " rows, graph has " +
                                std::to_string(n_) + " vertices");
  }

  Eigen::Index n_;
  double p_;
  std::vector<Edge> edges_;
};

/// F_p(f) = sum_ij w_ij |f_i - f_j|^p / (2 ||f||_p^p).
inline double p_dirichlet_ratio(const Eigen::VectorXd& f, const WeightedGraph& g, double p) {
  return 0.5 * PDirichletForm(g, p).column_ratio(f);
}

/// J_E(F) = sum_k sum_ij w_ij |F_ik - F_jk|^p / ||F_k||_p^p (no factor 1/2).
inline double embedding_objective(const Eigen::MatrixXd& F, const WeightedGraph& g, double p) {
  return PDirichletForm(g, p).objective(F);
}

inline Eigen::MatrixXd embedding_gradient(const Eigen::MatrixXd& F, const WeightedGraph& g, double p) {
  return PDirichletForm(g, p).gradient(F);
}

/// G = grad - F grad^T F; tangent to the orthonormality constraint.
inline Eigen::MatrixXd project_gradient(const Eigen::MatrixXd& F, const Eigen::MatrixXd& raw_grad) {
  require(F.rows() == raw_grad.rows() && F.cols() == raw_grad.cols(),
          "embedding and gradient shapes differ");
  return raw_grad - F * (raw_grad.transpose() * F);
}

/// Modified Gram-Schmidt with one re-orthogonalization pass, left to right.
/// Returns false if a column collapses.
inline bool orthonormalize_columns(Eigen::MatrixXd& F) {
  for (Eigen::Index k = 0; k < F.cols(); ++k) {
    const double original = F.col(k).norm();
    if (!(original > 0.0) || !std::isfinite(original)) return false;
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < k; ++j) F.col(k) -= F.col(j).dot(F.col(k)) * F.col(j);
    const double norm = F.col(k).norm();
    if (!(norm > 1e-10 * original)) return false;
    F.col(k) /= norm;
  }
  return true;
}

inline double orthonormality_error(const Eigen::MatrixXd& F) {
  const Eigen::MatrixXd gram = F.transpose() * F;
  return (gram - Eigen::MatrixXd::Identity(F.cols(), F.cols())).cwiseAbs().maxCoeff();
}

struct PLapConfig {
  double p = 2.0;
  /// 0 selects default_embedding_dim(N).
  Eigen::Index embedding_dim = 0;
  int max_iters = 2000;
  double rel_tol = 1e-6;
  /// Multiplier in alpha = step_scale * sum|F| / sum|G|.
  double step_scale = 0.01;
  int max_halvings = 30;
  /// Stop once ||G||_F <= grad_tol * p * J_E * ||F||_F (round-off stationarity).
  double grad_tol = 1e-10;

  void validate(Eigen::Index n) const {
    require(p >= 1.0 && p <= 3.0, "p must lie in [1, 3]");
    require(embedding_dim >= 0 && embedding_dim <= n,
            "embedding dimension must satisfy 1 <= K <= N");
    require(max_iters >= 0, "max_iters must be nonnegative");
    require(rel_tol > 0.0, "rel_tol must be positive");
    require(step_scale > 0.0, "step_scale must be positive");
    require(max_halvings >= 0, "max_halvings must be nonnegative");
    require(grad_tol >= 0.0, "grad_tol must be nonnegative");
  }
};

/// Full rank for desk-scale graphs, 64 columns beyond that.
inline Eigen::Index default_embedding_dim(Eigen::Index n) { return n <= 256 ? n : std::min<Eigen::Index>(n, 64); }

struct EigenSystem {
  Eigen::MatrixXd vectors;  // N x K, orthonormal columns
  Eigen::VectorXd values;   // ascending
  double p = 2.0;
  WeightedGraph source;

  /// vectors * diag(values) * vectors^T, exactly symmetric.
  Eigen::MatrixXd reconstruct() const {
    const Eigen::Index n = vectors.rows();
    const Eigen::MatrixXd scaled = vectors * values.asDiagonal();
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index u = 0; u < n; ++u)
      for (Eigen::Index v = u; v < n; ++v) {
        const double s = scaled.row(u).dot(vectors.row(v));
        out(u, v) = s;
        out(v, u) = s;
      }
    return out;
  }
};

struct SolverReport {
  int iterations = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  bool converged = false;
  std::string stop_reason;
  /// J_E after initialization and after every accepted step.
  std::vector<double> objective_history;
  double orthonormality_error = 0.0;
};

struct PLaplacian {
  EigenSystem system;
  Eigen::MatrixXd matrix;
  SolverReport report;
};

/// Projected gradient descent on J_E from a given starting embedding. The
/// start is orthonormalized first, so per-column rescaling has no effect.
inline PLaplacian approximate_p_laplacian(const WeightedGraph& g, Eigen::MatrixXd F,
                                          const PLapConfig& cfg) {
  cfg.validate(g.size());
  require(F.rows() == g.size() && F.cols() >= 1 && F.cols() <= g.size(),
          "initial embedding must be N x K with 1 <= K <= N");
  require(orthonormalize_columns(F), "initial embedding is rank deficient");

  const PDirichletForm form(g, cfg.p);
  SolverReport report;
  double objective = form.objective(F);
  report.initial_objective = objective;
  report.objective_history.push_back(objective);
  report.stop_reason = "max-iters";

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const Eigen::MatrixXd grad = project_gradient(F, form.gradient(F));
    const double grad_l1 = grad.cwiseAbs().sum();
    if (grad_l1 == 0.0 ||
        grad.norm() <= cfg.grad_tol * cfg.p * std::max(objective, std::numeric_limits<double>::min()) * F.norm()) {
      report.converged = true;
      report.stop_reason = "stationary";
      break;
    }
    double alpha = cfg.step_scale * F.cwiseAbs().sum() / grad_l1;
    bool accepted = false;
    double candidate_objective = objective;
    Eigen::MatrixXd candidate;
    for (int halving = 0; halving <= cfg.max_halvings; ++halving, alpha *= 0.5) {
      candidate = F - alpha * grad;
      if (!orthonormalize_columns(candidate)) continue;
      candidate_objective = form.objective(candidate);
      if (candidate_objective <= objective) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      report.converged = true;
      report.stop_reason = "no-descent";
      break;
    }
    F = std::move(candidate);
    const double change = std::abs(candidate_objective - objective);
    const double previous = objective;
    objective = candidate_objective;
    report.iterations = iter + 1;
    report.objective_history.push_back(objective);
    if (change <= cfg.rel_tol * std::abs(previous)) {
      report.converged = true;
      report.stop_reason = "objective";
      break;
    }
  }
  report.final_objective = objective;
  report.orthonormality_error = orthonormality_error(F);

  // Eigenvalue per column: energy / ||f||_p^p, i.e. twice F_p.
  const Eigen::Index k = F.cols();
  Eigen::VectorXd lambda(k);
  for (Eigen::Index c = 0; c < k; ++c) lambda(c) = form.column_ratio(F.col(c));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return lambda(a) < lambda(b); });

  EigenSystem system;
  system.p = cfg.p;
  system.source = g;
  system.vectors.resize(F.rows(), k);
  system.values.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto src = order[static_cast<std::size_t>(c)];
    system.vectors.col(c) = F.col(src);
    system.values(c) = lambda(src);
  }
  Eigen::MatrixXd matrix = system.reconstruct();
  return {std::move(system), std::move(matrix), std::move(report)};
}

/// The K eigenvectors of smallest eigenvalue, ascending.
inline Eigen::MatrixXd smallest_eigenvectors(const Eigen::MatrixXd& symmetric, Eigen::Index k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  require(solver.info() == Eigen::Success, "eigendecomposition of the initial Laplacian failed");
  return solver.eigenvectors().leftCols(k);
}

/// Approximate p-Laplacian: initialize from the smallest eigenvectors of
/// `init_laplacian`, then minimize J_E over W's weights.
inline PLaplacian approximate_p_laplacian(const WeightedGraph& g, const LaplacianMatrix& init_laplacian,
                                          const PLapConfig& cfg) {
  cfg.validate(g.size());
  require(init_laplacian.matrix.rows() == g.size() && init_laplacian.matrix.cols() == g.size(),
          "initial Laplacian size does not match the graph");
  const auto& l = init_laplacian.matrix;
  require((l - l.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, l.cwiseAbs().maxCoeff()),
          "initial Laplacian must be symmetric");
  const Eigen::Index k = cfg.embedding_dim == 0 ? default_embedding_dim(g.size()) : cfg.embedding_dim;
  return approximate_p_laplacian(g, smallest_eigenvectors(init_laplacian.matrix, k), cfg);
}

}  // namespace hplap

#endif  // HPLAP_PLAP_EIGEN_HPP_
