#include "cbmf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace cbmf {

double rmse(std::span<const PredictionPair> pairs, bool clamp, const RatingScale& scale) {
  if (pairs.empty()) throw ParameterError("rmse needs at least one pair");
  double total = 0.0;
  for (const PredictionPair& p : pairs) {
    const double pred = clamp ? scale.clamp(p.predicted) : p.predicted;
    const double e = p.actual - pred;
    total += e * e;
  }
  return std::sqrt(total / static_cast<double>(pairs.size()));
}

std::vector<std::pair<std::int64_t, double>> sliding_rmse(std::span<const PredictionPair> pairs,
                                                          std::int64_t window,
                                                          std::int64_t stride, bool clamp,
                                                          const RatingScale& scale) {
  const auto n = static_cast<std::int64_t>(pairs.size());
  if (window < 1) throw ParameterError("window must be >= 1");
  if (window > n) throw ParameterError("window exceeds the number of pairs");
  if (stride <= 0) stride = std::max<std::int64_t>(1, window / 2);
  std::vector<std::pair<std::int64_t, double>> out;
  for (std::int64_t start = 0; start + window <= n; start += stride)
    out.emplace_back(start + window,
                     rmse(pairs.subspan(static_cast<std::size_t>(start),
                                        static_cast<std::size_t>(window)),
                          clamp, scale));
  return out;
}

TopkResult topk(const CbmfModel& model, int u, int k, std::span<const int> candidates) {
  if (k < 1) throw ParameterError("k must be >= 1");
  TopkResult result;
  std::vector<std::pair<double, int>> scored;
  scored.reserve(candidates.size());
  for (int i : candidates) scored.emplace_back(predict_cbmf(model, u, i), i);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  result.truncated = static_cast<std::size_t>(k) > scored.size();
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
  result.items.reserve(take);
  for (std::size_t s = 0; s < take; ++s) result.items.push_back(scored[s].second);
  return result;
}

double cluster_coverage(std::span<const std::vector<int>> topk_lists, const ClusterMap& clusters) {
  if (topk_lists.empty()) return 0.0;
  std::int64_t covered = 0;
  for (const auto& list : topk_lists) {
    std::unordered_set<int> seen;
    for (int item : list) {
      if (item < 0 || item >= static_cast<int>(clusters.assignment.size()))
        throw ParameterError("item in top-k list is not covered by the cluster map");
      seen.insert(clusters.assignment[static_cast<std::size_t>(item)]);
    }
    if (seen.size() >= 2) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(topk_lists.size());
}

}  // namespace cbmf
