#ifndef HPLAP_KERNEL_HPP_
#define HPLAP_KERNEL_HPP_

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "hplap/error.hpp"
#include "hplap/graph.hpp"

namespace hplap {

/// rbf: exp(-||x - y||^2 / sigma^2); linear: x . y
struct KernelSpec {
  enum class Kind { rbf, linear };
  Kind kind = Kind::rbf;
  double sigma = 1.0;

  static KernelSpec rbf(double sigma) {
    require(std::isfinite(sigma) && sigma > 0.0, "rbf kernel width must be positive");
    return {Kind::rbf, sigma};
  }
  static KernelSpec linear() { return {Kind::linear, 0.0}; }

  /// rbf with sigma^2 = mean squared pairwise distance of the training rows,
  /// the same bandwidth the graph weights use.
  static KernelSpec rbf_auto(const Eigen::MatrixXd& features) {
    return rbf(std::sqrt(mean_squared_distance(squared_distances(features))));
  }

  template <typename A, typename B>
  double operator()(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) const {
    if (kind == Kind::linear) return x.dot(y);
    return std::exp(-(x - y).squaredNorm() / (sigma * sigma));
  }

  std::string name() const { return kind == Kind::rbf ? "rbf" : "linear"; }
};

/// Exactly symmetric Gram matrix over the rows of `x`.
inline Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x, const KernelSpec& kernel) {
  const auto n = x.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = kernel(x.row(i), x.row(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  return k;
}

/// Kernel between every row of `queries` and every training row.
inline Eigen::MatrixXd cross_gram(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& train,
                                  const KernelSpec& kernel) {
  require(queries.cols() == train.cols(), "feature dimension mismatch");
  Eigen::MatrixXd k(queries.rows(), train.rows());
  for (Eigen::Index i = 0; i < queries.rows(); ++i)
    for (Eigen::Index j = 0; j < train.rows(); ++j) k(i, j) = kernel(train.row(j), queries.row(i));
  return k;
}

}  // namespace hplap

#endif  // HPLAP_KERNEL_HPP_
