#ifndef CBMF_METRICS_HPP
#define CBMF_METRICS_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cbmf/cbmf_model.hpp"
#include "cbmf/ratings.hpp"

namespace cbmf {

struct PredictionPair {
  double predicted = 0.0;
  double actual = 0.0;
};

/// Root mean square error. With clamp set, predictions are clamped to the
/// scale first (actuals are taken as-is). Throws on empty input.
double rmse(std::span<const PredictionPair> pairs, bool clamp, const RatingScale& scale);

/// One window per (position, rmse) entry: windows start at 0, stride apart,
/// and only full windows count. position is the 1-based index of the
/// window's last pair. stride <= 0 picks max(1, window / 2).
std::vector<std::pair<std::int64_t, double>> sliding_rmse(std::span<const PredictionPair> pairs,
                                                          std::int64_t window,
                                                          std::int64_t stride, bool clamp,
                                                          const RatingScale& scale);

/// Top-k recommendation list. truncated flags k > |candidates| (all
/// candidates are then returned).
struct TopkResult {
  std::vector<int> items;
  bool truncated = false;
};

/// The k candidates with the highest predictions, descending; equal scores
/// ordered by item index. Callers pass candidates the user has not rated.
TopkResult topk(const CbmfModel& model, int u, int k, std::span<const int> candidates);

/// Fraction of lists drawing items from at least two different clusters.
double cluster_coverage(std::span<const std::vector<int>> topk_lists, const ClusterMap& clusters);

}  // namespace cbmf

#endif  // CBMF_METRICS_HPP
