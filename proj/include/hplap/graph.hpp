#ifndef HPLAP_GRAPH_HPP_
#define HPLAP_GRAPH_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hplap/error.hpp"
#include "hplap/feature_table.hpp"

namespace hplap {

/// Symmetric nonnegative affinity matrix with zero diagonal.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  explicit WeightedGraph(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
    require(weights_.rows() == weights_.cols(), "weight matrix must be square");
    const auto n = weights_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      require(weights_(i, i) == 0.0, "weight matrix diagonal must be zero");
      for (Eigen::Index j = 0; j < n; ++j) {
        const double w = weights_(i, j);
        require(std::isfinite(w) && w >= 0.0, "weights must be finite and nonnegative");
        require(w == weights_(j, i), "weight matrix must be exactly symmetric");
      }
    }
  }

  const Eigen::MatrixXd& weights() const { return weights_; }
  Eigen::Index size() const { return weights_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return weights_(i, j); }

 private:
  Eigen::MatrixXd weights_;
};

enum class WeightPolicy { gaussian, unit };

enum class LaplacianKind { normalized_hypergraph, normalized_simple, unnormalized_simple };

inline const char* to_string(LaplacianKind kind) {
  switch (kind) {
    case LaplacianKind::normalized_hypergraph: return "normalized-hypergraph";
    case LaplacianKind::normalized_simple: return "normalized-simple";
    case LaplacianKind::unnormalized_simple: return "unnormalized-simple";
  }
  return "?";
}

struct LaplacianMatrix {
  Eigen::MatrixXd matrix;
  LaplacianKind kind;
};

/// Pairwise squared Euclidean distances, exactly symmetric.
inline Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (x.row(i) - x.row(j)).squaredNorm();
      d2(i, j) = v;
      d2(j, i) = v;
    }
  return d2;
}

/// Mean squared distance over distinct pairs; the heat-kernel bandwidth sigma^2.
/// Falls back to 1 when every row coincides.
inline double mean_squared_distance(const Eigen::MatrixXd& d2) {
  const auto n = d2.rows();
  if (n < 2) return 1.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) sum += d2(i, j);
  const double mean = sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
  return mean > 0.0 ? mean : 1.0;
}

inline double heat_kernel(double squared_distance, double sigma2) {
  return std::exp(-squared_distance / sigma2);
}

namespace detail {

/// The k candidates nearest to `center`, ties broken by ascending index.
inline std::vector<std::size_t> nearest(const Eigen::MatrixXd& d2, std::size_t center,
                                        std::vector<std::size_t> candidates, std::size_t k) {
  std::erase(candidates, center);
  require(k <= candidates.size(), "not enough candidates for k nearest neighbors");
  const auto c = static_cast<Eigen::Index>(center);
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end(), [&](std::size_t a, std::size_t b) {
                      const double da = d2(c, static_cast<Eigen::Index>(a));
                      const double db = d2(c, static_cast<Eigen::Index>(b));
                      return da < db || (da == db && a < b);
                    });
  candidates.resize(k);
  return candidates;
}

inline std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace detail

/// Union-symmetrized kNN graph. Gaussian weights use sigma^2 = mean squared
/// pairwise distance over the whole table.
inline WeightedGraph build_knn_graph(const FeatureTable& table, std::size_t k,
                                     WeightPolicy policy = WeightPolicy::gaussian) {
  table.validate();
  const std::size_t n = table.rows();
  require(k >= 1 && k < n, "k must satisfy 1 <= k < N (k=" + std::to_string(k) +
                               ", N=" + std::to_string(n) + ")");
  const Eigen::MatrixXd d2 = squared_distances(table.features);
  const double sigma2 = mean_squared_distance(d2);
  const auto all = detail::iota(n);

  std::vector<std::vector<char>> adjacent(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (auto j : detail::nearest(d2, i, all, k)) {
      adjacent[i][j] = 1;
      adjacent[j][i] = 1;
    }

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!adjacent[i][j]) continue;
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      const double v = policy == WeightPolicy::unit ? 1.0 : heat_kernel(d2(a, b), sigma2);
      w(a, b) = v;
      w(b, a) = v;
    }
  return WeightedGraph(std::move(w));
}

struct HypergraphDegrees {
  Eigen::VectorXd vertex;  // d(v) = sum_e w(e) h(v,e)
  Eigen::VectorXi edge;    // delta(e) = sum_v h(v,e)
};

/// Vertex and hyperedge degrees. Throws on isolated vertices, since D_v^{-1/2}
/// would not exist.
inline HypergraphDegrees hypergraph_degrees(const Eigen::MatrixXd& incidence,
                                            const Eigen::VectorXd& edge_weights) {
  require(incidence.cols() == edge_weights.size(), "one weight per hyperedge required");
  for (Eigen::Index e = 0; e < edge_weights.size(); ++e)
    require(std::isfinite(edge_weights(e)) && edge_weights(e) > 0.0,
            "hyperedge weights must be positive");
  HypergraphDegrees deg{Eigen::VectorXd::Zero(incidence.rows()),
                        Eigen::VectorXi::Zero(incidence.cols())};
  for (Eigen::Index v = 0; v < incidence.rows(); ++v)
    for (Eigen::Index e = 0; e < incidence.cols(); ++e) {
      const double h = incidence(v, e);
      require(h == 0.0 || h == 1.0, "incidence matrix must be binary");
      if (h == 1.0) {
        deg.vertex(v) += edge_weights(e);
        deg.edge(e) += 1;
      }
    }
  for (Eigen::Index v = 0; v < incidence.rows(); ++v)
    require(deg.vertex(v) > 0.0, "vertex " + std::to_string(v) + " belongs to no hyperedge");
  return deg;
}

/// Binary incidence structure with positive hyperedge weights and derived degrees.
class Hypergraph {
 public:
  Hypergraph(Eigen::MatrixXd incidence, Eigen::VectorXd edge_weights)
      : incidence_(std::move(incidence)), edge_weights_(std::move(edge_weights)) {
    auto deg = hypergraph_degrees(incidence_, edge_weights_);
    vertex_degrees_ = std::move(deg.vertex);
    edge_degrees_ = std::move(deg.edge);
    members_.resize(static_cast<std::size_t>(incidence_.cols()));
    for (Eigen::Index e = 0; e < incidence_.cols(); ++e) {
      require(edge_degrees_(e) >= 2, "hyperedge " + std::to_string(e) + " has fewer than 2 vertices");
      for (Eigen::Index v = 0; v < incidence_.rows(); ++v)
        if (incidence_(v, e) == 1.0) members_[static_cast<std::size_t>(e)].push_back(v);
    }
  }

  /// From explicit vertex lists.
  static Hypergraph from_edges(Eigen::Index num_vertices,
                               const std::vector<std::vector<Eigen::Index>>& edges,
                               Eigen::VectorXd edge_weights) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(num_vertices, static_cast<Eigen::Index>(edges.size()));
    for (std::size_t e = 0; e < edges.size(); ++e)
      for (auto v : edges[e]) {
        require(v >= 0 && v < num_vertices, "hyperedge vertex out of range");
        h(v, static_cast<Eigen::Index>(e)) = 1.0;
      }
    return Hypergraph(std::move(h), std::move(edge_weights));
  }

  const Eigen::MatrixXd& incidence() const { return incidence_; }
  const Eigen::VectorXd& edge_weights() const { return edge_weights_; }
  const Eigen::VectorXd& vertex_degrees() const { return vertex_degrees_; }
  const Eigen::VectorXi& edge_degrees() const { return edge_degrees_; }
  const std::vector<Eigen::Index>& members(Eigen::Index e) const {
    return members_[static_cast<std::size_t>(e)];
  }
  Eigen::Index num_vertices() const { return incidence_.rows(); }
  Eigen::Index num_edges() const { return incidence_.cols(); }

 private:
  Eigen::MatrixXd incidence_;
  Eigen::VectorXd edge_weights_;
  Eigen::VectorXd vertex_degrees_;
  Eigen::VectorXi edge_degrees_;
  std::vector<std::vector<Eigen::Index>> members_;
};

/// One hyperedge per vertex: the vertex plus its k nearest neighbours,
/// searched inside the vertex's own group when `group_constrained`.
/// Gaussian policy weights each hyperedge by the mean heat kernel over its
/// distinct vertex pairs.
inline Hypergraph build_knn_hypergraph(const FeatureTable& table, std::size_t k,
                                       WeightPolicy policy = WeightPolicy::gaussian,
                                       bool group_constrained = false) {
  table.validate();
  const std::size_t n = table.rows();
  require(k >= 1 && k < n, "k must satisfy 1 <= k < N (k=" + std::to_string(k) +
                               ", N=" + std::to_string(n) + ")");
  const Eigen::MatrixXd d2 = squared_distances(table.features);
  const double sigma2 = mean_squared_distance(d2);

  std::vector<std::vector<std::size_t>> candidates_of(n);
  if (group_constrained) {
    require(table.has_groups(), "group-constrained hypergraph requires a group column");
    const auto groups = table.group_members();
    for (const auto& [gid, members] : groups) {
      require(members.size() > k, "group " + std::to_string(gid) + " has " +
                                      std::to_string(members.size()) +
                                      " members, needs more than k=" + std::to_string(k));
      for (auto v : members) candidates_of[v] = members;
    }
  } else {
    const auto all = detail::iota(n);
    for (auto& c : candidates_of) c = all;
  }

  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(ni, ni);
  Eigen::VectorXd w(ni);
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<std::size_t> edge = detail::nearest(d2, v, candidates_of[v], k);
    edge.insert(edge.begin(), v);
    const auto e = static_cast<Eigen::Index>(v);
    for (auto u : edge) h(static_cast<Eigen::Index>(u), e) = 1.0;
    if (policy == WeightPolicy::unit) {
      w(e) = 1.0;
    } else {
      double sum = 0.0;
      std::size_t pairs = 0;
      for (std::size_t a = 0; a < edge.size(); ++a)
        for (std::size_t b = a + 1; b < edge.size(); ++b, ++pairs)
          sum += heat_kernel(d2(static_cast<Eigen::Index>(edge[a]), static_cast<Eigen::Index>(edge[b])),
                             sigma2);
      w(e) = sum / static_cast<double>(pairs);
      // exp underflow on far-apart members would break w(e) > 0.
      w(e) = std::max(w(e), std::numeric_limits<double>::min());
    }
  }
  return Hypergraph(std::move(h), std::move(w));
}

namespace detail {

/// sum_e c(e) h(u,e) h(v,e) for all u <= v, mirrored.
template <typename EdgeCoefficient>
Eigen::MatrixXd co_membership(const Hypergraph& hg, EdgeCoefficient coefficient) {
  const auto n = hg.num_vertices();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index e = 0; e < hg.num_edges(); ++e) {
    const double c = coefficient(e);
    const auto& m = hg.members(e);
    for (std::size_t a = 0; a < m.size(); ++a)
      for (std::size_t b = a; b < m.size(); ++b) {
        const auto u = std::min(m[a], m[b]), v = std::max(m[a], m[b]);
        s(u, v) += c;
      }
  }
  for (Eigen::Index u = 0; u < n; ++u)
    for (Eigen::Index v = u + 1; v < n; ++v) s(v, u) = s(u, v);
  return s;
}

}  // namespace detail

/// L = I - D_v^{-1/2} H W D_e^{-1} H^T D_v^{-1/2}
inline LaplacianMatrix hypergraph_laplacian(const Hypergraph& hg) {
  const auto& dv = hg.vertex_degrees();
  for (Eigen::Index v = 0; v < dv.size(); ++v)
    require(dv(v) > 0.0, "vertex " + std::to_string(v) + " has zero degree");
  Eigen::MatrixXd theta = detail::co_membership(hg, [&](Eigen::Index e) {
    return hg.edge_weights()(e) / static_cast<double>(hg.edge_degrees()(e));
  });
  const auto n = hg.num_vertices();
  Eigen::MatrixXd l(n, n);
  for (Eigen::Index u = 0; u < n; ++u)
    for (Eigen::Index v = u; v < n; ++v) {
      const double entry = (u == v ? 1.0 : 0.0) - theta(u, v) / std::sqrt(dv(u) * dv(v));
      l(u, v) = entry;
      l(v, u) = entry;
    }
  return {std::move(l), LaplacianKind::normalized_hypergraph};
}

/// W^hp = H W H^T - D_v: pairwise co-membership weight, zero diagonal.
inline WeightedGraph hypergraph_adjacency(const Hypergraph& hg) {
  Eigen::MatrixXd a = detail::co_membership(hg, [&](Eigen::Index e) { return hg.edge_weights()(e); });
  // (H W H^T)_vv = d(v); subtracting D_v leaves exactly zero.
  a.diagonal().setZero();
  return WeightedGraph(std::move(a));
}

/// D - W.
inline LaplacianMatrix unnormalized_laplacian(const WeightedGraph& g) {
  const auto& w = g.weights();
  const auto n = w.rows();
  Eigen::MatrixXd l = -w;
  for (Eigen::Index i = 0; i < n; ++i) {
    double degree = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) degree += w(i, j);
    l(i, i) = degree;
  }
  return {std::move(l), LaplacianKind::unnormalized_simple};
}

/// Simple-graph Laplacian as the 2-uniform case of the hypergraph operator:
/// 1/2 (I - D^{-1/2} W D^{-1/2}).
inline LaplacianMatrix normalized_laplacian(const WeightedGraph& g) {
  const auto& w = g.weights();
  const auto n = w.rows();
  Eigen::VectorXd d = w.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i)
    require(d(i) > 0.0, "vertex " + std::to_string(i) + " has zero degree");
  Eigen::MatrixXd l(n, n);
  for (Eigen::Index u = 0; u < n; ++u)
    for (Eigen::Index v = u; v < n; ++v) {
      const double entry = 0.5 * ((u == v ? 1.0 : 0.0) - w(u, v) / std::sqrt(d(u) * d(v)));
      l(u, v) = entry;
      l(v, u) = entry;
    }
  return {std::move(l), LaplacianKind::normalized_simple};
}

}  // namespace hplap

#endif  // HPLAP_GRAPH_HPP_
