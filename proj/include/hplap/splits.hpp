#ifndef HPLAP_SPLITS_HPP_
#define HPLAP_SPLITS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hplap/error.hpp"
#include "hplap/feature_table.hpp"

namespace hplap {

struct SplitSpec {
  double labeled_fraction = 0.1;
  std::uint64_t seed = 1;
  int repeats = 5;
};

struct Split {
  std::vector<Eigen::Index> labeled;    // ascending
  std::vector<Eigen::Index> unlabeled;  // ascending
};

/// Stratified labeled/unlabeled partitions: round(fraction * n_c) labeled rows
/// per class, `repeats` independent draws from one seeded stream.
inline std::vector<Split> split_labels(const FeatureTable& table, const SplitSpec& spec) {
  require(spec.labeled_fraction > 0.0 && spec.labeled_fraction <= 1.0,
          "labeled fraction must lie in (0, 1]");
  require(spec.repeats >= 1, "repeats must be positive");
  std::map<int, std::vector<Eigen::Index>> by_class;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    require(table.class_labels[i].has_value(), "split_labels needs a class label on every row");
    by_class[*table.class_labels[i]].push_back(static_cast<Eigen::Index>(i));
  }
  std::map<int, std::size_t> quota;
  for (const auto& [cls, rows] : by_class) {
    const auto q = static_cast<std::size_t>(std::llround(spec.labeled_fraction * static_cast<double>(rows.size())));
    require(q >= 1, "labeled fraction " + std::to_string(spec.labeled_fraction) +
                        " leaves class " + std::to_string(cls) + " without labeled samples");
    quota[cls] = std::min(q, rows.size());
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<Split> out;
  for (int r = 0; r < spec.repeats; ++r) {
    Split s;
    for (auto [cls, rows] : by_class) {
      std::shuffle(rows.begin(), rows.end(), rng);
      const auto q = quota[cls];
      s.labeled.insert(s.labeled.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(q));
      s.unlabeled.insert(s.unlabeled.end(), rows.begin() + static_cast<std::ptrdiff_t>(q), rows.end());
    }
    std::sort(s.labeled.begin(), s.labeled.end());
    std::sort(s.unlabeled.begin(), s.unlabeled.end());
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace hplap

#endif  // HPLAP_SPLITS_HPP_
