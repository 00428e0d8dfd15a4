#ifndef HPLAP_FEATURE_TABLE_HPP_
#define HPLAP_FEATURE_TABLE_HPP_

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hplap/error.hpp"

namespace hplap {

/// N samples of d-dimensional features with optional class and group ids.
///
/// Class labels are optional per row (unlabeled rows hold std::nullopt);
/// group ids are all-or-nothing.
struct FeatureTable {
  Eigen::MatrixXd features;
  std::vector<std::optional<int>> class_labels;
  std::optional<std::vector<int>> group_labels;
  std::vector<std::string> ids;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t dims() const { return static_cast<std::size_t>(features.cols()); }

  bool has_groups() const { return group_labels.has_value(); }

  bool fully_labeled() const {
    for (const auto& c : class_labels)
      if (!c) return false;
    return true;
  }

  /// Distinct class ids present, ascending.
  std::vector<int> classes() const {
    std::set<int> seen;
    for (const auto& c : class_labels)
      if (c) seen.insert(*c);
    return {seen.begin(), seen.end()};
  }

  /// Row indices per group id.
  std::map<int, std::vector<std::size_t>> group_members() const {
    require(has_groups(), "feature table has no group column");
    std::map<int, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < rows(); ++i) out[(*group_labels)[i]].push_back(i);
    return out;
  }

  /// Subset of rows, in the given order.
  FeatureTable select(const std::vector<std::size_t>& rows_to_keep) const {
    FeatureTable out;
    out.features.resize(static_cast<Eigen::Index>(rows_to_keep.size()), features.cols());
    out.class_labels.reserve(rows_to_keep.size());
    if (has_groups()) out.group_labels.emplace();
    for (std::size_t r = 0; r < rows_to_keep.size(); ++r) {
      const auto src = rows_to_keep[r];
      require(src < rows(), "row index out of range");
      out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(src));
      out.class_labels.push_back(class_labels[src]);
      if (has_groups()) out.group_labels->push_back((*group_labels)[src]);
      if (!ids.empty()) out.ids.push_back(ids[src]);
    }
    return out;
  }

  std::string id_of(std::size_t row) const {
    return ids.empty() ? std::to_string(row) : ids[row];
  }

  void validate() const {
    require(features.rows() >= 2, "feature table needs at least 2 rows");
    require(features.cols() >= 1, "feature table needs at least 1 feature column");
    require(features.allFinite(), "feature table contains non-finite values");
    require(class_labels.size() == rows(), "class label column length mismatch");
    if (has_groups())
      require(group_labels->size() == rows(), "group column length mismatch");
    require(ids.empty() || ids.size() == rows(), "id column length mismatch");
  }
};

/// Builds a table with every row labeled (or unlabeled, if labels is empty).
inline FeatureTable make_table(Eigen::MatrixXd features, const std::vector<int>& labels = {},
                               std::optional<std::vector<int>> groups = std::nullopt) {
  FeatureTable t;
  t.features = std::move(features);
  t.class_labels.resize(t.rows());
  for (std::size_t i = 0; i < labels.size() && i < t.rows(); ++i) t.class_labels[i] = labels[i];
  t.group_labels = std::move(groups);
  t.validate();
  return t;
}

}  // namespace hplap

#endif  // HPLAP_FEATURE_TABLE_HPP_
