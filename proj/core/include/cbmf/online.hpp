#ifndef CBMF_ONLINE_HPP
#define CBMF_ONLINE_HPP

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cbmf/cbmf_model.hpp"
#include "cbmf/metrics.hpp"
#include "cbmf/ratings.hpp"

namespace cbmf {

/// What an integration pass is allowed to touch. Item state and the other
/// users' state are never touched in any mode.
enum class IntegrationMode {
  local_bias_only,    // the rated cluster's delta
  user_factors_only,  // p_u, with item factors frozen
  both,
};

/// Accepts the short CLI names (bias / factors / both) and the long ones.
IntegrationMode integration_mode_from_name(std::string_view name);
std::string_view integration_mode_name(IntegrationMode mode);  // short form

/// Work done by one integrate_rating call: descent passes over the user's
/// ratings in the rated cluster, and one residual evaluation per rating per
/// pass (residual_evals = passes * |cluster ratings|, by construction).
struct IntegrationResult {
  int passes = 0;
  std::int64_t residual_evals = 0;
  std::int64_t cluster_size = 0;  // |V(u, c)| including the new rating
};

struct IntegrationStats {
  std::int64_t ratings_integrated = 0;
  std::int64_t ratings_rejected = 0;
  std::int64_t total_passes = 0;
  std::int64_t total_residual_evals = 0;
  double total_update_seconds = 0.0;

  double mean_update_seconds() const {
    return ratings_integrated > 0 ? total_update_seconds / static_cast<double>(ratings_integrated)
                                  : 0.0;
  }
};

/// Options for the online descent loop: smaller epoch cap than offline
/// training, same relative-improvement stop.
struct OnlineOptions {
  int max_passes = 20;
  double min_rel_improve = 1e-4;
};

/// Folds one rating into the model: appends it to the store, bumps the
/// user's counts, then runs gradient passes over the user's ratings in the
/// rated cluster (new one included). Per pass, each rating contributes one
/// residual e and, depending on mode, a delta update, a p_u update with
/// item factors frozen, or both. The pass loop stops when the running sum
/// of e^2 stops improving or at max_passes.
///
/// Unknown user/item or a duplicate throws RejectionError before anything
/// is modified. Requires exclusive access to model and store.
IntegrationResult integrate_rating(CbmfModel& model, RatingStore& store, const Rating& r,
                                   IntegrationMode mode, const Hyperparams& hp,
                                   const OnlineOptions& opts = {});

struct StreamResult {
  std::vector<PredictionPair> predictions;       // one per integrated rating
  std::vector<std::size_t> integrated_indices;   // stream positions behind them
  IntegrationStats stats;
};

/// Replays an ordered stream. With evaluate_before_integrate set, each
/// rating's prediction is recorded before that rating is integrated, so the
/// pairs form a prequential evaluation. Rejected ratings are logged and
/// skipped; they leave no prediction pair.
StreamResult integrate_stream(CbmfModel& model, RatingStore& store, std::span<const Rating> stream,
                              IntegrationMode mode, const Hyperparams& hp,
                              bool evaluate_before_integrate, const OnlineOptions& opts = {});

/// Full pipeline over everything currently in the store: bootstrap
/// factorization, k-means on the item factors, cluster means, warm-started
/// training. Rebuilds the store's cluster index to match the new
/// assignment. The seed overrides hp.seed for the whole run.
CbmfModel refactorize(RatingStore& store, const Hyperparams& hp, int n_clusters,
                      std::uint64_t seed, int n_boot_iters = 10, int kmeans_max_rounds = 100);

}  // namespace cbmf

#endif  // CBMF_ONLINE_HPP
