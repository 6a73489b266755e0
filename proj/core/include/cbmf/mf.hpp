#ifndef CBMF_MF_HPP
#define CBMF_MF_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cbmf/ratings.hpp"

namespace cbmf {

// Row-major so one entity's factor vector is contiguous.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

/// Shared SGD knobs. learning_rate/factor_reg/bias_reg are the usual
/// lambda/beta/gamma trio; defaults follow the common calibration for
/// explicit-feedback SGD (0.001 / 0.02 / 0.05, 40 factors, 120 epochs).
struct Hyperparams {
  int n_factors = 40;
  double learning_rate = 0.001;
  double factor_reg = 0.02;
  double bias_reg = 0.05;
  int max_iters = 120;
  double min_rel_improve = 1e-4;
  std::uint64_t seed = 1;

  /// Throws ParameterError on nonsense values. Zero rates/regularizers are
  /// allowed (useful for no-op and unregularized runs), negatives are not.
  void validate() const;
};

/// Latent factors plus the overall mean rating. user_factors is
/// n_users x K, item_factors n_items x K (row per entity).
struct FactorModel {
  Mat user_factors;
  Mat item_factors;
  double global_mean = 0.0;

  int n_users() const { return static_cast<int>(user_factors.rows()); }
  int n_items() const { return static_cast<int>(item_factors.rows()); }
  int n_factors() const { return static_cast<int>(user_factors.cols()); }
};

/// Additive per-entity deviations from the mean. Zero for entities with no
/// training ratings.
struct BiasTable {
  Vec user_bias;
  Vec item_bias;
};

/// Epoch-end objective values, for convergence diagnostics.
struct TrainTrace {
  std::vector<double> objective;
  bool stopped_early = false;
};

/// Factors drawn uniformly from [0, 0.1/sqrt(K)], user rows first, then item
/// rows, from a generator seeded with hp.seed. Same seed, same model.
FactorModel init_factors(int n_users, int n_items, const Hyperparams& hp);

/// Plain dot product, no mean, no clamping.
double predict_basic(const FactorModel& model, int u, int i);

/// Dot product plus mean and both biases.
double predict_biased(const FactorModel& model, const BiasTable& biases, int u, int i);

/// Per-epoch SGD over the store's rating order. Each rating contributes
///   p_uk <- p_uk + lr(2 e q_ik - factor_reg p_uk)
///   q_ik <- q_ik + lr(2 e p_uk - factor_reg q_ik)   (pre-update p_uk)
/// with e the plain dot-product residual. Stops when the regularized
/// objective's relative decrease falls below min_rel_improve, or at
/// max_iters. Throws TrainingError if the objective goes non-finite.
FactorModel train_basic(const RatingStore& store, const Hyperparams& hp,
                        TrainTrace* trace = nullptr);

/// Same loop with the biased residual; after the factor updates each rating
/// also applies
///   b_i <- b_i + lr(2 e - bias_reg b_i),  then  b_u likewise.
/// Biases start at zero.
std::pair<FactorModel, BiasTable> train_biased(const RatingStore& store, const Hyperparams& hp,
                                               TrainTrace* trace = nullptr);

/// Sum over known ratings of e^2 + factor_reg(|p_u|^2 + |q_i|^2), plus
/// bias_reg(b_u^2 + b_i^2) when biases is non-null (the residual then uses
/// the biased prediction).
double regularized_sse(const FactorModel& model, const BiasTable* biases,
                       const RatingStore& store, const Hyperparams& hp);

}  // namespace cbmf

#endif  // CBMF_MF_HPP
