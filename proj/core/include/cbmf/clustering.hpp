#ifndef CBMF_CLUSTERING_HPP
#define CBMF_CLUSTERING_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "cbmf/mf.hpp"
#include "cbmf/ratings.hpp"

namespace cbmf {

/// Item -> cluster assignment plus the mean rating of each cluster's items.
struct ClusterMap {
  std::vector<int> assignment;
  std::vector<double> cluster_mean;
  int n_clusters = 0;
};

/// Outcome of the bias-variance sanity check; see variance_bound_report.
struct DissimilarityReport {
  double total_var = 0.0;
  double total_dissim = 0.0;
  bool bound_holds = false;
};

/// Item factor rows after a short basic factorization: exactly n_boot_iters
/// epochs, no early stopping. n_boot_iters = 0 returns the seeded
/// initialization untouched.
Mat bootstrap_item_factors(const RatingStore& store, const Hyperparams& hp, int n_boot_iters);

/// Lloyd's algorithm on the rows of points. Initial centroids are k
/// seed-sampled rows, distinct values where possible. An emptied cluster
/// steals the point currently farthest from its own centroid. Stops on an
/// assignment fixpoint or after max_rounds. wcss, when given, receives the
/// within-cluster sum of squared distances after every round.
std::vector<int> kmeans(const Mat& points, int k, std::uint64_t seed, int max_rounds = 100,
                        std::vector<double>* wcss = nullptr);

/// Per-cluster means over the store's known ratings. A cluster whose items
/// have no ratings falls back to the overall mean.
ClusterMap build_cluster_map(const RatingStore& store, std::span<const int> assignment,
                             int n_clusters);

/// Builds the store's per-(user, cluster) rating view from the map.
void index_by_cluster(RatingStore& store, const ClusterMap& clusters);

/// Sum over users who rated both items of |r_ui - r_uj|; 0 with no co-rater.
double dissimilarity(const RatingStore& store, int i, int j);

/// Brute-force check that the total user bias variance is bounded by the
/// squared total pairwise item dissimilarity:
///   0 <= sum_u Var_u <= (sum_{i<j} dissim_ij)^2
/// Var_u is the variance of r_ui - mu over u's ratings, for users with at
/// least two of them.
DissimilarityReport variance_bound_report(const RatingStore& store);

}  // namespace cbmf

#endif  // CBMF_CLUSTERING_HPP
