#include "cbmf/mf.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "cbmf/log.hpp"

namespace cbmf {

void Hyperparams::validate() const {
  if (n_factors < 1) throw ParameterError("n_factors must be >= 1");
  if (!(learning_rate >= 0)) throw ParameterError("learning_rate must be >= 0");
  if (!(factor_reg >= 0)) throw ParameterError("factor_reg must be >= 0");
  if (!(bias_reg >= 0)) throw ParameterError("bias_reg must be >= 0");
  if (max_iters < 1) throw ParameterError("max_iters must be >= 1");
}

FactorModel init_factors(int n_users, int n_items, const Hyperparams& hp) {
  hp.validate();
  if (n_users < 1 || n_items < 1) throw ParameterError("need at least one user and one item");
  FactorModel model;
  model.user_factors.resize(n_users, hp.n_factors);
  model.item_factors.resize(n_items, hp.n_factors);
  std::mt19937_64 rng(hp.seed);
  std::uniform_real_distribution<double> dist(0.0, 0.1 / std::sqrt(static_cast<double>(hp.n_factors)));
  for (int u = 0; u < n_users; ++u)
    for (int k = 0; k < hp.n_factors; ++k) model.user_factors(u, k) = dist(rng);
  for (int i = 0; i < n_items; ++i)
    for (int k = 0; k < hp.n_factors; ++k) model.item_factors(i, k) = dist(rng);
  return model;
}

namespace {

void check_index(const FactorModel& model, int u, int i) {
  if (u < 0 || u >= model.n_users())
    throw std::out_of_range("user index " + std::to_string(u) + " out of range");
  if (i < 0 || i >= model.n_items())
    throw std::out_of_range("item index " + std::to_string(i) + " out of range");
}

// Shared epoch loop for the basic and biased variants. The residual and the
// extra bias updates are the only differences, so the biased path is a flag.
struct SgdRunner {
  const RatingStore& store;
  const Hyperparams& hp;
  bool with_biases;

  FactorModel model;
  BiasTable biases;

  void run(TrainTrace* trace) {
    const double lr = hp.learning_rate;
    const double breg = hp.factor_reg;
    const double greg = hp.bias_reg;
    const int K = hp.n_factors;

    double prev = std::numeric_limits<double>::infinity();
    for (int epoch = 1; epoch <= hp.max_iters; ++epoch) {
      for (const StoredRating& r : store.ratings()) {
        double* p = model.user_factors.row(r.user).data();
        double* q = model.item_factors.row(r.item).data();
        double dot = 0.0;
        for (int k = 0; k < K; ++k) dot += p[k] * q[k];
        double e = r.value - dot;
        if (with_biases)
          e -= model.global_mean + biases.user_bias[r.user] + biases.item_bias[r.item];
        for (int k = 0; k < K; ++k) {
          const double pk = p[k];
          const double qk = q[k];
          p[k] = pk + lr * (2 * e * qk - breg * pk);
          q[k] = qk + lr * (2 * e * pk - breg * qk);
        }
        if (with_biases) {
          double& bi = biases.item_bias[r.item];
          bi += lr * (2 * e - greg * bi);
          double& bu = biases.user_bias[r.user];
          bu += lr * (2 * e - greg * bu);
        }
      }
      const double obj = regularized_sse(model, with_biases ? &biases : nullptr, store, hp);
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
  }
};

}  // namespace

double predict_basic(const FactorModel& model, int u, int i) {
  check_index(model, u, i);
  return model.user_factors.row(u).dot(model.item_factors.row(i));
}

double predict_biased(const FactorModel& model, const BiasTable& biases, int u, int i) {
  check_index(model, u, i);
  return model.user_factors.row(u).dot(model.item_factors.row(i)) + model.global_mean +
         biases.user_bias[u] + biases.item_bias[i];
}

FactorModel train_basic(const RatingStore& store, const Hyperparams& hp, TrainTrace* trace) {
  hp.validate();
  if (store.n_ratings() == 0) throw ParameterError("cannot train on an empty store");
  SgdRunner runner{store, hp, false, init_factors(store.n_users(), store.n_items(), hp), {}};
  runner.model.global_mean = store.mean_rating();
  runner.run(trace);
  return std::move(runner.model);
}

std::pair<FactorModel, BiasTable> train_biased(const RatingStore& store, const Hyperparams& hp,
                                               TrainTrace* trace) {
  hp.validate();
  if (store.n_ratings() == 0) throw ParameterError("cannot train on an empty store");
  SgdRunner runner{store, hp, true, init_factors(store.n_users(), store.n_items(), hp), {}};
  runner.model.global_mean = store.mean_rating();
  runner.biases.user_bias = Vec::Zero(store.n_users());
  runner.biases.item_bias = Vec::Zero(store.n_items());
  runner.run(trace);
  return {std::move(runner.model), std::move(runner.biases)};
}

double regularized_sse(const FactorModel& model, const BiasTable* biases,
                       const RatingStore& store, const Hyperparams& hp) {
  if (model.n_users() != store.n_users() || model.n_items() != store.n_items())
    throw ParameterError("model dimensions do not match the store");
  double total = 0.0;
  for (const StoredRating& r : store.ratings()) {
    double pred = model.user_factors.row(r.user).dot(model.item_factors.row(r.item));
    if (biases)
      pred += model.global_mean + biases->user_bias[r.user] + biases->item_bias[r.item];
    const double e = r.value - pred;
    total += e * e + hp.factor_reg * (model.user_factors.row(r.user).squaredNorm() +
                                      model.item_factors.row(r.item).squaredNorm());
    if (biases) {
      const double bu = biases->user_bias[r.user];
      const double bi = biases->item_bias[r.item];
      total += hp.bias_reg * (bu * bu + bi * bi);
    }
  }
  return total;
}

}  // namespace cbmf
