#include "cbmf/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

namespace cbmf {

Mat bootstrap_item_factors(const RatingStore& store, const Hyperparams& hp, int n_boot_iters) {
  if (n_boot_iters < 0) throw ParameterError("n_boot_iters must be >= 0");
  if (n_boot_iters == 0) return init_factors(store.n_users(), store.n_items(), hp).item_factors;
  Hyperparams boot = hp;
  boot.max_iters = n_boot_iters;
  // disable the plateau stop so the epoch count is exact
  boot.min_rel_improve = -std::numeric_limits<double>::infinity();
  return train_basic(store, boot).item_factors;
}

std::vector<int> kmeans(const Mat& points, int k, std::uint64_t seed, int max_rounds,
                        std::vector<double>* wcss) {
  const int n = static_cast<int>(points.rows());
  if (k < 1) throw ParameterError("k must be >= 1");
  if (k > n) throw ParameterError("k exceeds the number of points");

  std::mt19937_64 rng(seed);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  Mat centroids(k, points.cols());
  {
    // prefer k distinct rows; fall back to whatever is left when the data
    // has fewer distinct values than clusters
    std::vector<int> chosen;
    for (int idx : order) {
      bool dup = false;
      for (int c : chosen)
        if ((points.row(idx) - points.row(c)).squaredNorm() == 0.0) { dup = true; break; }
      if (!dup) chosen.push_back(idx);
      if (static_cast<int>(chosen.size()) == k) break;
    }
    for (int idx : order) {
      if (static_cast<int>(chosen.size()) == k) break;
      if (std::find(chosen.begin(), chosen.end(), idx) == chosen.end()) chosen.push_back(idx);
    }
    for (int c = 0; c < k; ++c) centroids.row(c) = points.row(chosen[static_cast<std::size_t>(c)]);
  }

  std::vector<int> assignment(static_cast<std::size_t>(n), 0);
  std::vector<int> cluster_size(static_cast<std::size_t>(k), 0);

  auto assign_all = [&]() {
    bool changed = false;
    std::fill(cluster_size.begin(), cluster_size.end(), 0);
    for (int p = 0; p < n; ++p) {
      int best = 0;
      double best_d = (points.row(p) - centroids.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        double d = (points.row(p) - centroids.row(c)).squaredNorm();
        if (d < best_d) { best_d = d; best = c; }
      }
      if (assignment[static_cast<std::size_t>(p)] != best) {
        assignment[static_cast<std::size_t>(p)] = best;
        changed = true;
      }
      ++cluster_size[static_cast<std::size_t>(best)];
    }
    return changed;
  };

  auto repair_empties = [&]() {
    bool changed = false;
    for (int c = 0; c < k; ++c) {
      if (cluster_size[static_cast<std::size_t>(c)] > 0) continue;
      int worst = -1;
      double worst_d = -1.0;
      for (int p = 0; p < n; ++p) {
        int pc = assignment[static_cast<std::size_t>(p)];
        if (cluster_size[static_cast<std::size_t>(pc)] < 2) continue;
        double d = (points.row(p) - centroids.row(pc)).squaredNorm();
        if (d > worst_d) { worst_d = d; worst = p; }
      }
      if (worst < 0) continue;
      --cluster_size[static_cast<std::size_t>(assignment[static_cast<std::size_t>(worst)])];
      assignment[static_cast<std::size_t>(worst)] = c;
      ++cluster_size[static_cast<std::size_t>(c)];
      centroids.row(c) = points.row(worst);
      changed = true;
    }
    return changed;
  };

  auto recompute_centroids = [&]() {
    Mat sums = Mat::Zero(k, points.cols());
    for (int p = 0; p < n; ++p)
      sums.row(assignment[static_cast<std::size_t>(p)]) += points.row(p);
    for (int c = 0; c < k; ++c)
      if (cluster_size[static_cast<std::size_t>(c)] > 0)
        centroids.row(c) = sums.row(c) / cluster_size[static_cast<std::size_t>(c)];
  };

  for (int round = 0; round < max_rounds; ++round) {
    bool changed = assign_all();
    changed = repair_empties() || changed;
    recompute_centroids();
    if (wcss) {
      double total = 0.0;
      for (int p = 0; p < n; ++p)
        total += (points.row(p) - centroids.row(assignment[static_cast<std::size_t>(p)])).squaredNorm();
      wcss->push_back(total);
    }
    if (!changed) break;
  }
  return assignment;
}

ClusterMap build_cluster_map(const RatingStore& store, std::span<const int> assignment,
                             int n_clusters) {
  if (static_cast<int>(assignment.size()) != store.n_items())
    throw ParameterError("assignment size does not match item count");
  if (n_clusters < 1) throw ParameterError("need at least one cluster");
  for (int c : assignment)
    if (c < 0 || c >= n_clusters) throw ParameterError("cluster id out of range");

  ClusterMap map;
  map.n_clusters = n_clusters;
  map.assignment.assign(assignment.begin(), assignment.end());
  std::vector<double> sum(static_cast<std::size_t>(n_clusters), 0.0);
  std::vector<std::int64_t> count(static_cast<std::size_t>(n_clusters), 0);
  // accumulate in the store's rating order, same as mean_rating, so the
  // one-cluster case reproduces the overall mean bit for bit
  for (const StoredRating& r : store.ratings()) {
    int c = map.assignment[static_cast<std::size_t>(r.item)];
    sum[static_cast<std::size_t>(c)] += r.value;
    ++count[static_cast<std::size_t>(c)];
  }
  const double mu = store.mean_rating();
  map.cluster_mean.resize(static_cast<std::size_t>(n_clusters));
  for (int c = 0; c < n_clusters; ++c)
    map.cluster_mean[static_cast<std::size_t>(c)] =
        count[static_cast<std::size_t>(c)] > 0
            ? sum[static_cast<std::size_t>(c)] / static_cast<double>(count[static_cast<std::size_t>(c)])
            : mu;
  return map;
}

void index_by_cluster(RatingStore& store, const ClusterMap& clusters) {
  store.build_cluster_index(clusters.assignment, clusters.n_clusters);
}

double dissimilarity(const RatingStore& store, int i, int j) {
  if (i < 0 || i >= store.n_items() || j < 0 || j >= store.n_items())
    throw ParameterError("item index out of range");
  std::unordered_map<int, double> value_i;
  for (const StoredRating& r : store.ratings())
    if (r.item == i) value_i.emplace(r.user, r.value);
  double total = 0.0;
  for (const StoredRating& r : store.ratings()) {
    if (r.item != j) continue;
    auto it = value_i.find(r.user);
    if (it != value_i.end()) total += std::abs(it->second - r.value);
  }
  return total;
}

DissimilarityReport variance_bound_report(const RatingStore& store) {
  const double mu = store.mean_rating();
  DissimilarityReport report;
  for (int u = 0; u < store.n_users(); ++u) {
    const auto& list = store.ratings_of(u);
    if (list.size() < 2) continue;
    double bu = 0.0;
    for (int idx : list) bu += store.ratings()[static_cast<std::size_t>(idx)].value - mu;
    bu /= static_cast<double>(list.size());
    double var = 0.0;
    for (int idx : list) {
      double dev = (store.ratings()[static_cast<std::size_t>(idx)].value - mu) - bu;
      var += dev * dev;
    }
    report.total_var += var / static_cast<double>(list.size());
  }
  // half the ordered-pair total = sum over each user's unordered item pairs
  for (int u = 0; u < store.n_users(); ++u) {
    const auto& list = store.ratings_of(u);
    for (std::size_t a = 0; a < list.size(); ++a)
      for (std::size_t b = a + 1; b < list.size(); ++b)
        report.total_dissim += std::abs(store.ratings()[static_cast<std::size_t>(list[a])].value -
                                        store.ratings()[static_cast<std::size_t>(list[b])].value);
  }
  report.bound_holds =
      report.total_var >= 0.0 && report.total_var <= report.total_dissim * report.total_dissim;
  return report;
}

}  // namespace cbmf
