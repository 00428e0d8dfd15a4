#ifndef HPLAP_METRICS_HPP_
#define HPLAP_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hplap/error.hpp"

namespace hplap {

/// Non-interpolated average precision: mean of precision@r over the ranks r
/// holding a positive, ranking by descending score with ties broken by
/// ascending index. std::nullopt when there are no positives.
inline std::optional<double> average_precision(const std::vector<double>& scores,
                                               const std::vector<bool>& positives) {
  require(scores.size() == positives.size(), "scores and relevance flags differ in length");
  for (double s : scores) require(!std::isnan(s), "average_precision: NaN score");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  // extended accumulator so short lists round like their exact fractions
  std::size_t hits = 0;
  long double sum = 0.0L;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!positives[order[r]]) continue;
    ++hits;
    sum += static_cast<long double>(hits) / static_cast<long double>(r + 1);
  }
  if (hits == 0) return std::nullopt;
  return static_cast<double>(sum / static_cast<long double>(hits));
}

/// Arithmetic mean of the defined per-class APs; NaN if none is defined.
inline double mean_average_precision(const std::map<int, double>& per_class_ap) {
  if (per_class_ap.empty()) return std::nan("");
  double sum = 0.0;
  for (const auto& [cls, ap] : per_class_ap) sum += ap;
  return sum / static_cast<double>(per_class_ap.size());
}

struct MetricReport {
  std::string variant;
  std::string evaluation;  // "transductive" or "inductive"
  std::map<int, double> per_class_ap;
  double map = std::nan("");

  void finalize() { map = mean_average_precision(per_class_ap); }
};

}  // namespace hplap

#endif  // HPLAP_METRICS_HPP_
