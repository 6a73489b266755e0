#include "cbmf/online.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "cbmf/log.hpp"

namespace cbmf {

IntegrationMode integration_mode_from_name(std::string_view name) {
  if (name == "bias" || name == "local-bias-only") return IntegrationMode::local_bias_only;
  if (name == "factors" || name == "user-factors-only") return IntegrationMode::user_factors_only;
  if (name == "both") return IntegrationMode::both;
  throw ParameterError("unknown integration mode \"" + std::string(name) +
                       "\" (expected bias, factors or both)");
}

std::string_view integration_mode_name(IntegrationMode mode) {
  switch (mode) {
    case IntegrationMode::local_bias_only: return "bias";
    case IntegrationMode::user_factors_only: return "factors";
    case IntegrationMode::both: return "both";
  }
  return "?";
}

IntegrationResult integrate_rating(CbmfModel& model, RatingStore& store, const Rating& r,
                                   IntegrationMode mode, const Hyperparams& hp,
                                   const OnlineOptions& opts) {
  hp.validate();
  if (opts.max_passes < 1) throw ParameterError("max_passes must be >= 1");
  if (!store.has_cluster_index() || store.n_index_clusters() != model.n_clusters())
    throw ParameterError("store is not indexed for the model's clusters");

  // append rejects unknown ids and duplicates before any state changes
  store.append(r);
  const int u = *store.users().find(r.user);
  const int i = *store.items().find(r.item);
  const int c = model.clusters.assignment[static_cast<std::size_t>(i)];
  ++model.user_counts[u];
  ++model.cluster_counts(u, c);

  const auto& cluster_list = store.cluster_ratings_of(u, c);
  const double lr = hp.learning_rate;
  const double breg = hp.factor_reg;
  const double greg = hp.bias_reg;
  const int K = hp.n_factors;
  const bool touch_delta =
      mode == IntegrationMode::local_bias_only || mode == IntegrationMode::both;
  const bool touch_factors =
      mode == IntegrationMode::user_factors_only || mode == IntegrationMode::both;

  IntegrationResult result;
  result.cluster_size = static_cast<std::int64_t>(cluster_list.size());
  double* p = model.factors.user_factors.row(u).data();
  double prev_sse = std::numeric_limits<double>::infinity();
  for (int pass = 1; pass <= opts.max_passes; ++pass) {
    // sse accumulates the residuals computed for the updates themselves, so
    // each pass evaluates exactly |cluster_list| residuals
    double sse = 0.0;
    for (int idx : cluster_list) {
      const StoredRating& s = store.ratings()[static_cast<std::size_t>(idx)];
      const double* q = model.factors.item_factors.row(s.item).data();
      double dot = 0.0;
      for (int k = 0; k < K; ++k) dot += p[k] * q[k];
      const double e =
          s.value - (dot + model.clusters.cluster_mean[static_cast<std::size_t>(c)] +
                     model.delta(u, c) + model.biases.user_bias[u] + model.biases.item_bias[s.item]);
      sse += e * e;
      if (touch_factors)
        for (int k = 0; k < K; ++k) p[k] += lr * (2 * e * q[k] - breg * p[k]);
      if (touch_delta) {
        double& d = model.delta(u, c);
        d += lr * (2 * e - greg * d);
      }
    }
    ++result.passes;
    result.residual_evals += static_cast<std::int64_t>(cluster_list.size());
    if (!std::isfinite(sse)) throw TrainingError(pass, "online update diverged");
    if (pass > 1 && prev_sse > 0 && (prev_sse - sse) / prev_sse < opts.min_rel_improve) break;
    if (sse == 0.0) break;
    prev_sse = sse;
  }
  return result;
}

StreamResult integrate_stream(CbmfModel& model, RatingStore& store, std::span<const Rating> stream,
                              IntegrationMode mode, const Hyperparams& hp,
                              bool evaluate_before_integrate, const OnlineOptions& opts) {
  StreamResult result;
  result.predictions.reserve(stream.size());
  for (std::size_t pos = 0; pos < stream.size(); ++pos) {
    const Rating& r = stream[pos];
    const auto u = store.users().find(r.user);
    const auto i = store.items().find(r.item);
    bool predicted = false;
    if (evaluate_before_integrate && u && i) {
      result.predictions.push_back({predict_cbmf(model, *u, *i), r.value});
      predicted = true;
    }
    const auto start = std::chrono::steady_clock::now();
    try {
      IntegrationResult one = integrate_rating(model, store, r, mode, hp, opts);
      result.stats.total_passes += one.passes;
      result.stats.total_residual_evals += one.residual_evals;
      ++result.stats.ratings_integrated;
      result.integrated_indices.push_back(pos);
    } catch (const RejectionError& err) {
      log_info(std::string("rejected rating: ") + err.what());
      ++result.stats.ratings_rejected;
      if (predicted) result.predictions.pop_back();
      continue;
    }
    result.stats.total_update_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return result;
}

CbmfModel refactorize(RatingStore& store, const Hyperparams& hp, int n_clusters,
                      std::uint64_t seed, int n_boot_iters, int kmeans_max_rounds) {
  if (store.n_ratings() == 0) throw ParameterError("cannot refactorize an empty store");
  Hyperparams local = hp;
  local.seed = seed;
  Mat item_points = bootstrap_item_factors(store, local, n_boot_iters);
  std::vector<int> assignment = kmeans(item_points, n_clusters, seed, kmeans_max_rounds);
  ClusterMap clusters = build_cluster_map(store, assignment, n_clusters);
  store.drop_cluster_index();
  index_by_cluster(store, clusters);
  return train_cbmf(store, local, clusters);
}

}  // namespace cbmf
