#include "cbmf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace cbmf {

void SyntheticSpec::validate() const {
  if (n_users < 1 || n_items < 1) throw ParameterError("need at least one user and one item");
  if (n_clusters < 1 || n_clusters > n_items)
    throw ParameterError("n_clusters must lie in [1, n_items]");
  if (rank < 1) throw ParameterError("rank must be >= 1");
  if (mean_ratings_per_user < 1) throw ParameterError("mean_ratings_per_user must be >= 1");
  if (user_offset_sd < 0 || item_offset_sd < 0 || local_offset_sd < 0 || factor_sd < 0 ||
      noise_sd < 0 || drift_sd < 0)
    throw ParameterError("standard deviations must be >= 0");
  if (!(scale.max > scale.min)) throw ParameterError("scale.max must exceed scale.min");
  if (t_end <= t_begin) throw ParameterError("t_end must exceed t_begin");
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  auto normal = [&rng](double sd) {
    if (sd <= 0) return 0.0;
    std::normal_distribution<double> dist(0.0, sd);
    return dist(rng);
  };

  SyntheticData data;
  data.item_cluster.resize(static_cast<std::size_t>(spec.n_items));
  for (int i = 0; i < spec.n_items; ++i)
    data.item_cluster[static_cast<std::size_t>(i)] = i % spec.n_clusters;

  std::vector<double> cluster_mean(static_cast<std::size_t>(spec.n_clusters));
  for (int c = 0; c < spec.n_clusters; ++c)
    cluster_mean[static_cast<std::size_t>(c)] =
        3.0 + spec.cluster_mean_spacing * (c - (spec.n_clusters - 1) / 2.0);

  std::vector<double> item_offset(static_cast<std::size_t>(spec.n_items));
  std::vector<std::vector<double>> item_factors(
      static_cast<std::size_t>(spec.n_items), std::vector<double>(static_cast<std::size_t>(spec.rank)));
  for (int i = 0; i < spec.n_items; ++i) {
    item_offset[static_cast<std::size_t>(i)] = normal(spec.item_offset_sd);
    for (int k = 0; k < spec.rank; ++k)
      item_factors[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = normal(spec.factor_sd);
    // give every cluster its own factor direction so item clustering is
    // recoverable from a bootstrap factorization
    item_factors[static_cast<std::size_t>(i)]
                [static_cast<std::size_t>(data.item_cluster[static_cast<std::size_t>(i)] % spec.rank)] +=
        spec.cluster_axis_boost;
  }

  const double extra_mean = std::max(0.0, spec.mean_ratings_per_user - 5.0);
  std::vector<int> item_pool(static_cast<std::size_t>(spec.n_items));
  std::iota(item_pool.begin(), item_pool.end(), 0);
  std::vector<double> p(static_cast<std::size_t>(spec.rank));
  std::vector<double> local(static_cast<std::size_t>(spec.n_clusters));
  std::vector<double> slope(static_cast<std::size_t>(spec.n_clusters));
  const double span = static_cast<double>(spec.t_end - spec.t_begin);

  for (int u = 0; u < spec.n_users; ++u) {
    const double user_offset = normal(spec.user_offset_sd);
    for (int k = 0; k < spec.rank; ++k) p[static_cast<std::size_t>(k)] = normal(spec.factor_sd);
    for (int c = 0; c < spec.n_clusters; ++c) {
      local[static_cast<std::size_t>(c)] = normal(spec.local_offset_sd);
      slope[static_cast<std::size_t>(c)] = normal(spec.drift_sd);
    }

    int n_u = 5;
    if (extra_mean > 0) {
      std::poisson_distribution<int> pois(extra_mean);
      n_u += pois(rng);
    }
    n_u = std::min(n_u, spec.n_items);

    // partial Fisher-Yates: the first n_u entries become this user's items
    for (int s = 0; s < n_u; ++s) {
      std::uniform_int_distribution<int> pick(s, spec.n_items - 1);
      std::swap(item_pool[static_cast<std::size_t>(s)],
                item_pool[static_cast<std::size_t>(pick(rng))]);
    }

    for (int s = 0; s < n_u; ++s) {
      const int i = item_pool[static_cast<std::size_t>(s)];
      const int c = data.item_cluster[static_cast<std::size_t>(i)];
      std::uniform_int_distribution<std::int64_t> when(spec.t_begin, spec.t_end - 1);
      const std::int64_t t = when(rng);
      const double tau = static_cast<double>(t - spec.t_begin) / span;
      double dot = 0.0;
      for (int k = 0; k < spec.rank; ++k)
        dot += p[static_cast<std::size_t>(k)] *
               item_factors[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      const double value = cluster_mean[static_cast<std::size_t>(c)] + user_offset +
                           item_offset[static_cast<std::size_t>(i)] +
                           local[static_cast<std::size_t>(c)] +
                           slope[static_cast<std::size_t>(c)] * tau + dot + normal(spec.noise_sd);
      data.ratings.push_back(Rating{u + 1, i + 1, spec.scale.clamp(value), t});
    }
  }

  std::stable_sort(data.ratings.begin(), data.ratings.end(),
                   [](const Rating& a, const Rating& b) { return a.timestamp < b.timestamp; });
  return data;
}

}  // namespace cbmf
