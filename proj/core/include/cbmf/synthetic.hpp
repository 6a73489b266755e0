#ifndef CBMF_SYNTHETIC_HPP
#define CBMF_SYNTHETIC_HPP

#include <cstdint>
#include <vector>

#include "cbmf/ratings.hpp"

namespace cbmf {

/// Generator for planted-model rating data. Each rating is
///   value = cluster_mean(c(i)) + user_offset + item_offset
///           + local_offset(u, c(i), t) + p_u . q_i + noise
/// clamped to the scale. Cluster means are spread cluster_mean_spacing
/// apart around 3.0. Item factors carry a per-cluster axis boost so the
/// planted clusters are recoverable from factorization alone. With
/// drift_sd > 0 the local offsets move linearly over the covered time span
/// by an N(0, drift_sd) total amount, which makes frozen models go stale.
struct SyntheticSpec {
  int n_users = 5000;
  int n_items = 500;
  int n_clusters = 3;
  double mean_ratings_per_user = 20.0;  // 5 + Poisson(mean - 5)
  int rank = 4;
  double cluster_mean_spacing = 0.5;
  double user_offset_sd = 0.35;
  double item_offset_sd = 0.25;
  double local_offset_sd = 0.45;
  double factor_sd = 0.2;
  double cluster_axis_boost = 0.6;
  double noise_sd = 0.25;
  double drift_sd = 0.0;
  RatingScale scale;
  std::int64_t t_begin = 1'500'000'000;
  std::int64_t t_end = 1'531'536'000;  // one year later
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticData {
  std::vector<Rating> ratings;     // sorted by timestamp, ties in draw order
  std::vector<int> item_cluster;   // planted assignment, item id 1 at index 0
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace cbmf

#endif  // CBMF_SYNTHETIC_HPP
