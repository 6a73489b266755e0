#ifndef CBMF_CBMF_MODEL_HPP
#define CBMF_CBMF_MODEL_HPP

#include <cstdint>

#include "cbmf/clustering.hpp"
#include "cbmf/mf.hpp"
#include "cbmf/ratings.hpp"

namespace cbmf {

using CountMat = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CountVec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Factor model extended with cluster-local user deviations: delta(u, c)
/// shifts u's predictions inside cluster c, weighted at initialization by
/// u's rating share in c. cluster_counts/user_counts track how many ratings
/// back each delta.
struct CbmfModel {
  FactorModel factors;
  BiasTable biases;
  ClusterMap clusters;
  Mat delta;                 // n_users x n_clusters
  CountMat cluster_counts;   // ratings of u inside c
  CountVec user_counts;      // ratings of u overall

  int n_users() const { return factors.n_users(); }
  int n_items() const { return factors.n_items(); }
  int n_clusters() const { return clusters.n_clusters; }
};

struct CbmfBiasInit {
  BiasTable biases;
  Mat delta;
  CountMat cluster_counts;
  CountVec user_counts;
};

/// Data-driven warm start. With mu the overall mean and mu_c the cluster
/// means:
///   b_u     = mean over u's ratings of (r - mu)
///   b_i     = mean over i's raters of (r - mu)
///   local_c = mean over u's ratings inside c of (r - mu_c)
///   delta   = (n_uc / n_u) (local_c - b_u),  0 where n_uc = 0
/// The store must carry the cluster index for `clusters`.
CbmfBiasInit init_cbmf_biases(const RatingStore& store, const ClusterMap& clusters);

/// p_u . q_i + mu_c(i) + delta(u, c(i)) + b_u + b_i
double predict_cbmf(const CbmfModel& model, int u, int i);

/// Sum over known ratings of e^2 + factor_reg(|p_u|^2 + |q_i|^2)
/// + bias_reg(delta^2 + b_u^2 + b_i^2), e being the full residual.
double cbmf_objective(const CbmfModel& model, const RatingStore& store, const Hyperparams& hp);

/// SGD with the full residual. Per rating: the factor-pair updates of
/// train_basic, then b_i, b_u as in train_biased, then
///   delta <- delta + lr(2 e - bias_reg delta)
/// on the rated cluster. Biases and deltas start from init_cbmf_biases.
/// Same stopping and divergence rules as train_basic.
CbmfModel train_cbmf(const RatingStore& store, const Hyperparams& hp, const ClusterMap& clusters,
                     TrainTrace* trace = nullptr);

}  // namespace cbmf

#endif  // CBMF_CBMF_MODEL_HPP
