#include <benchmark/benchmark.h>

#include <vector>

#include "cbmf/cbmf_model.hpp"
#include "cbmf/mf.hpp"
#include "cbmf/online.hpp"
#include "cbmf/ratings.hpp"
#include "cbmf/synthetic.hpp"

using namespace cbmf;

namespace {

// one mid-size drifting world shared by every benchmark: ~21k training
// ratings, ~21k held-out arrivals, a trained cluster model
struct World {
  RatingStore train;
  std::vector<Rating> stream;
  CbmfModel model;
  Hyperparams hp;
};

const World& world() {
  static const World w = [] {
    SyntheticSpec spec;
    spec.n_users = 2000;
    spec.n_items = 250;
    spec.mean_ratings_per_user = 21.0;
    spec.drift_sd = 1.0;
    spec.seed = 3;
    SyntheticData data = generate_synthetic(spec);

    World w;
    w.hp.n_factors = 8;
    w.hp.max_iters = 40;
    w.hp.seed = spec.seed;
    auto [train, stream] = chronological_split(
        data.ratings, SplitSpec{0.5, SplitSpec::Mode::global_chronological}, spec.scale);
    w.train = std::move(train);
    w.stream = std::move(stream);
    w.model = refactorize(w.train, w.hp, 3, w.hp.seed);
    return w;
  }();
  return w;
}

Hyperparams one_epoch(const Hyperparams& base) {
  Hyperparams hp = base;
  hp.max_iters = 1;
  hp.min_rel_improve = -1e30;
  return hp;
}

}  // namespace

// full train_* call at max_iters=1: init + one SGD sweep + objective
static void BM_EpochBasic(benchmark::State& state) {
  const World& w = world();
  const Hyperparams hp = one_epoch(w.hp);
  for (auto _ : state) benchmark::DoNotOptimize(train_basic(w.train, hp));
  state.SetItemsProcessed(state.iterations() * w.train.n_ratings());
}
BENCHMARK(BM_EpochBasic)->Unit(benchmark::kMillisecond);

static void BM_EpochBiased(benchmark::State& state) {
  const World& w = world();
  const Hyperparams hp = one_epoch(w.hp);
  for (auto _ : state) benchmark::DoNotOptimize(train_biased(w.train, hp));
  state.SetItemsProcessed(state.iterations() * w.train.n_ratings());
}
BENCHMARK(BM_EpochBiased)->Unit(benchmark::kMillisecond);

static void BM_EpochCbmf(benchmark::State& state) {
  const World& w = world();
  const Hyperparams hp = one_epoch(w.hp);
  for (auto _ : state)
    benchmark::DoNotOptimize(train_cbmf(w.train, hp, w.model.clusters));
  state.SetItemsProcessed(state.iterations() * w.train.n_ratings());
}
BENCHMARK(BM_EpochCbmf)->Unit(benchmark::kMillisecond);

static void BM_PredictCbmf(benchmark::State& state) {
  const World& w = world();
  const auto& ratings = w.train.ratings();
  std::size_t k = 0;
  double acc = 0.0;
  for (auto _ : state) {
    const StoredRating& r = ratings[k++ % ratings.size()];
    acc += predict_cbmf(w.model, r.user, r.item);
  }
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PredictCbmf);

// integrates fresh arrivals; rewinds to the pristine model when the stream
// runs out so no iteration hits a duplicate
static void BM_Integrate(benchmark::State& state, IntegrationMode mode) {
  const World& w = world();
  CbmfModel model = w.model;
  RatingStore store = w.train;
  std::size_t k = 0;
  for (auto _ : state) {
    if (k == w.stream.size()) {
      state.PauseTiming();
      model = w.model;
      store = w.train;
      k = 0;
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(integrate_rating(model, store, w.stream[k++], mode, w.hp));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK_CAPTURE(BM_Integrate, local_bias, IntegrationMode::local_bias_only);
BENCHMARK_CAPTURE(BM_Integrate, user_factors, IntegrationMode::user_factors_only);
BENCHMARK_CAPTURE(BM_Integrate, both, IntegrationMode::both);

// the cost being avoided: bootstrap factorization + clustering + full retrain
static void BM_Refactorize(benchmark::State& state) {
  const World& w = world();
  for (auto _ : state) {
    RatingStore store = w.train;
    benchmark::DoNotOptimize(refactorize(store, w.hp, 3, w.hp.seed));
  }
}
BENCHMARK(BM_Refactorize)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
