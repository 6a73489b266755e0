#include "cbmf/cbmf_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cbmf/log.hpp"

namespace cbmf {

namespace {

void require_index(const RatingStore& store, const ClusterMap& clusters) {
  if (static_cast<int>(clusters.assignment.size()) != store.n_items())
    throw ParameterError("cluster map does not cover the store's items");
  if (!store.has_cluster_index() || store.n_index_clusters() != clusters.n_clusters)
    throw ParameterError("store is not indexed for this cluster map");
}

}  // namespace

CbmfBiasInit init_cbmf_biases(const RatingStore& store, const ClusterMap& clusters) {
  require_index(store, clusters);
  const double mu = store.mean_rating();
  const int n_users = store.n_users();
  const int n_items = store.n_items();
  const int n_clusters = clusters.n_clusters;

  CbmfBiasInit out;
  out.biases.user_bias = Vec::Zero(n_users);
  out.biases.item_bias = Vec::Zero(n_items);
  out.delta = Mat::Zero(n_users, n_clusters);
  out.cluster_counts = CountMat::Zero(n_users, n_clusters);
  out.user_counts = CountVec::Zero(n_users);

  Vec item_sum = Vec::Zero(n_items);
  CountVec item_count = CountVec::Zero(n_items);
  for (const StoredRating& r : store.ratings()) {
    item_sum[r.item] += r.value - mu;
    ++item_count[r.item];
  }
  for (int i = 0; i < n_items; ++i)
    if (item_count[i] > 0) out.biases.item_bias[i] = item_sum[i] / static_cast<double>(item_count[i]);

  for (int u = 0; u < n_users; ++u) {
    const auto& list = store.ratings_of(u);
    out.user_counts[u] = static_cast<std::int64_t>(list.size());
    if (list.empty()) continue;
    double sum = 0.0;
    for (int idx : list) sum += store.ratings()[static_cast<std::size_t>(idx)].value - mu;
    const double bu = sum / static_cast<double>(list.size());
    out.biases.user_bias[u] = bu;
    for (int c = 0; c < n_clusters; ++c) {
      const auto& clist = store.cluster_ratings_of(u, c);
      out.cluster_counts(u, c) = static_cast<std::int64_t>(clist.size());
      if (clist.empty()) continue;
      double csum = 0.0;
      for (int idx : clist)
        csum += store.ratings()[static_cast<std::size_t>(idx)].value -
                clusters.cluster_mean[static_cast<std::size_t>(c)];
      const double local = csum / static_cast<double>(clist.size());
      const double weight = static_cast<double>(clist.size()) / static_cast<double>(list.size());
      out.delta(u, c) = weight * (local - bu);
    }
  }
  return out;
}

double predict_cbmf(const CbmfModel& model, int u, int i) {
  if (u < 0 || u >= model.n_users())
    throw std::out_of_range("user index " + std::to_string(u) + " out of range");
  if (i < 0 || i >= model.n_items())
    throw std::out_of_range("item index " + std::to_string(i) + " out of range");
  const int c = model.clusters.assignment[static_cast<std::size_t>(i)];
  return model.factors.user_factors.row(u).dot(model.factors.item_factors.row(i)) +
         model.clusters.cluster_mean[static_cast<std::size_t>(c)] + model.delta(u, c) +
         model.biases.user_bias[u] + model.biases.item_bias[i];
}

double cbmf_objective(const CbmfModel& model, const RatingStore& store, const Hyperparams& hp) {
  if (model.n_users() != store.n_users() || model.n_items() != store.n_items())
    throw ParameterError("model dimensions do not match the store");
  double total = 0.0;
  for (const StoredRating& r : store.ratings()) {
    const int c = model.clusters.assignment[static_cast<std::size_t>(r.item)];
    const double pred =
        model.factors.user_factors.row(r.user).dot(model.factors.item_factors.row(r.item)) +
        model.clusters.cluster_mean[static_cast<std::size_t>(c)] + model.delta(r.user, c) +
        model.biases.user_bias[r.user] + model.biases.item_bias[r.item];
    const double e = r.value - pred;
    const double bu = model.biases.user_bias[r.user];
    const double bi = model.biases.item_bias[r.item];
    const double d = model.delta(r.user, c);
    total += e * e +
             hp.factor_reg * (model.factors.user_factors.row(r.user).squaredNorm() +
                              model.factors.item_factors.row(r.item).squaredNorm()) +
             hp.bias_reg * (d * d + bu * bu + bi * bi);
  }
  return total;
}

CbmfModel train_cbmf(const RatingStore& store, const Hyperparams& hp, const ClusterMap& clusters,
                     TrainTrace* trace) {
  hp.validate();
  if (store.n_ratings() == 0) throw ParameterError("cannot train on an empty store");
  require_index(store, clusters);

  CbmfModel model;
  model.factors = init_factors(store.n_users(), store.n_items(), hp);
  model.factors.global_mean = store.mean_rating();
  model.clusters = clusters;
  CbmfBiasInit init = init_cbmf_biases(store, clusters);
  model.biases = std::move(init.biases);
  model.delta = std::move(init.delta);
  model.cluster_counts = std::move(init.cluster_counts);
  model.user_counts = std::move(init.user_counts);

  const double lr = hp.learning_rate;
  const double breg = hp.factor_reg;
  const double greg = hp.bias_reg;
  const int K = hp.n_factors;

  double prev = std::numeric_limits<double>::infinity();
  for (int epoch = 1; epoch <= hp.max_iters; ++epoch) {
    for (const StoredRating& r : store.ratings()) {
      const int c = model.clusters.assignment[static_cast<std::size_t>(r.item)];
      double* p = model.factors.user_factors.row(r.user).data();
      double* q = model.factors.item_factors.row(r.item).data();
      double dot = 0.0;
      for (int k = 0; k < K; ++k) dot += p[k] * q[k];
      const double e = r.value - (dot + model.clusters.cluster_mean[static_cast<std::size_t>(c)] +
                                  model.delta(r.user, c) + model.biases.user_bias[r.user] +
                                  model.biases.item_bias[r.item]);
      for (int k = 0; k < K; ++k) {
        const double pk = p[k];
        const double qk = q[k];
        p[k] = pk + lr * (2 * e * qk - breg * pk);
        q[k] = qk + lr * (2 * e * pk - breg * qk);
      }
      double& bi = model.biases.item_bias[r.item];
      bi += lr * (2 * e - greg * bi);
      double& bu = model.biases.user_bias[r.user];
      bu += lr * (2 * e - greg * bu);
      double& d = model.delta(r.user, c);
      d += lr * (2 * e - greg * d);
    }
    const double obj = cbmf_objective(model, store, hp);
    if (!std::isfinite(obj)) throw TrainingError(epoch, "objective diverged");
    if (trace) trace->objective.push_back(obj);
    log_debug("epoch " + std::to_string(epoch) + " objective " + std::to_string(obj));
    if (epoch > 1 && prev > 0 && (prev - obj) / prev < hp.min_rel_improve) {
      if (trace) trace->stopped_early = true;
      break;
    }
    if (obj == 0.0) {
      if (trace) trace->stopped_early = true;
      break;
    }
    prev = obj;
  }
  return model;
}

}  // namespace cbmf
