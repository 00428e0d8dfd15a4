#ifndef HPLAP_SYNTHETIC_HPP_
#define HPLAP_SYNTHETIC_HPP_

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hplap/error.hpp"
#include "hplap/feature_table.hpp"

namespace hplap {

/// Gaussian blobs, one per class. A group's classes sit side by side,
/// class_spread apart, across a random axis shared by the group; groups are
/// centered group_spread from the origin. `elongation` stretches every blob of
/// a group along that shared axis.
struct SyntheticSpec {
  int classes = 4;
  int groups = 2;
  int points_per_class = 50;
  double noise = 0.7;
  std::uint64_t seed = 1;
  int dims = 5;
  double group_spread = 5.0;
  double class_spread = 2.0;
  double elongation = 3.0;

  void validate() const {
    require(classes >= 2, "synthetic data needs at least 2 classes");
    require(groups >= 1, "synthetic data needs at least 1 group");
    require(classes % groups == 0, "classes must divide evenly into groups");
    require(points_per_class >= 1, "points_per_class must be positive");
    require(noise >= 0.0, "noise must be nonnegative");
    require(dims >= 1, "dims must be positive");
    require(elongation > 0.0, "elongation must be positive");
  }
};

namespace detail {

inline Eigen::VectorXd random_direction(std::mt19937_64& rng, int dims) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dims);
  do {
    for (int i = 0; i < dims; ++i) v(i) = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

}  // namespace detail

/// Rows are ordered class by class; class c belongs to group c / (classes/groups).
inline FeatureTable make_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int per_group = spec.classes / spec.groups;

  std::vector<Eigen::VectorXd> group_centers, group_axes, group_offsets;
  for (int g = 0; g < spec.groups; ++g) {
    group_centers.push_back(spec.groups == 1 ? Eigen::VectorXd::Zero(spec.dims)
                                             : Eigen::VectorXd(spec.group_spread * detail::random_direction(rng, spec.dims)));
    Eigen::VectorXd axis = detail::random_direction(rng, spec.dims);
    Eigen::VectorXd offset = detail::random_direction(rng, spec.dims);
    if (spec.dims > 1) {
      offset -= axis.dot(offset) * axis;
      while (offset.norm() < 1e-8) {
        offset = detail::random_direction(rng, spec.dims);
        offset -= axis.dot(offset) * axis;
      }
      offset.normalize();
    }
    group_axes.push_back(std::move(axis));
    group_offsets.push_back(std::move(offset));
  }
  std::vector<Eigen::VectorXd> class_centers;
  for (int c = 0; c < spec.classes; ++c) {
    const auto g = static_cast<std::size_t>(c / per_group);
    const double slot = (c % per_group) - 0.5 * (per_group - 1);
    class_centers.push_back(group_centers[g] + slot * spec.class_spread * group_offsets[g]);
  }

  const Eigen::Index n = static_cast<Eigen::Index>(spec.classes) * spec.points_per_class;
  FeatureTable t;
  t.features.resize(n, spec.dims);
  t.group_labels.emplace();
  Eigen::Index row = 0;
  for (int c = 0; c < spec.classes; ++c)
    for (int i = 0; i < spec.points_per_class; ++i, ++row) {
      Eigen::VectorXd z(spec.dims);
      for (int j = 0; j < spec.dims; ++j) z(j) = normal(rng);
      const auto& axis = group_axes[static_cast<std::size_t>(c / per_group)];
      z += (spec.elongation - 1.0) * axis.dot(z) * axis;
      t.features.row(row) = (class_centers[static_cast<std::size_t>(c)] + spec.noise * z).transpose();
      t.class_labels.emplace_back(c);
      t.group_labels->push_back(c / per_group);
      t.ids.push_back("s" + std::to_string(row));
    }
  t.validate();
  return t;
}

}  // namespace hplap

#endif  // HPLAP_SYNTHETIC_HPP_
