#include "cbmf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "cbmf/clustering.hpp"
#include "cbmf/format.hpp"
#include "cbmf/log.hpp"
#include "cbmf/metrics.hpp"

namespace cbmf {

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"initial-quality",   "size-impact",
                                                 "offline-decay",     "online-robustness",
                                                 "tradeoff",          "refactorization"};
  return names;
}

void ExperimentConfig::validate() const {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string valid;
    for (const auto& n : names) {
      if (!valid.empty()) valid += ", ";
      valid += n;
    }
    throw ParameterError("unknown experiment \"" + name + "\" (valid: " + valid + ")");
  }
  hp.validate();
  if (n_clusters < 1) throw ParameterError("n_clusters must be >= 1");
  if (n_boot_iters < 0) throw ParameterError("n_boot_iters must be >= 0");
  if (!(test_fraction > 0 && test_fraction < 1))
    throw ParameterError("test_fraction must lie in (0, 1)");
  if (n_chunks < 1) throw ParameterError("n_chunks must be >= 1");
  if (window < 0 || stride < 0) throw ParameterError("window and stride must be >= 0");
  if (online.max_passes < 1) throw ParameterError("online max_passes must be >= 1");
  if (refactor_points.empty()) throw ParameterError("refactor_points must not be empty");
  double prev = 0.0;
  for (double p : refactor_points) {
    if (!(p > prev && p < 1)) throw ParameterError("refactor_points must ascend within (0, 1)");
    prev = p;
  }
}

namespace {

namespace fs = std::filesystem;

std::string config_echo(const ExperimentConfig& config) {
  nlohmann::json j;
  j["experiment"] = config.name;
  j["dataset"] = config.dataset_label;
  j["scale"] = {{"min", config.scale.min}, {"max", config.scale.max}};
  j["hyperparams"] = {{"n_factors", config.hp.n_factors},
                      {"learning_rate", config.hp.learning_rate},
                      {"factor_reg", config.hp.factor_reg},
                      {"bias_reg", config.hp.bias_reg},
                      {"max_iters", config.hp.max_iters},
                      {"min_rel_improve", config.hp.min_rel_improve},
                      {"seed", config.hp.seed}};
  j["n_clusters"] = config.n_clusters;
  j["n_boot_iters"] = config.n_boot_iters;
  j["test_fraction"] = config.test_fraction;
  j["n_chunks"] = config.n_chunks;
  j["window"] = config.window;
  j["stride"] = config.stride;
  j["mode"] = std::string(integration_mode_name(config.mode));
  j["online"] = {{"max_passes", config.online.max_passes},
                 {"min_rel_improve", config.online.min_rel_improve}};
  j["refactor_points"] = config.refactor_points;
  j["clamp"] = config.clamp;
  return j.dump(2);
}

CbmfModel train_cbmf_pipeline(RatingStore& store, const ExperimentConfig& config) {
  Mat points = bootstrap_item_factors(store, config.hp, config.n_boot_iters);
  std::vector<int> assignment = kmeans(points, config.n_clusters, config.hp.seed);
  ClusterMap clusters = build_cluster_map(store, assignment, config.n_clusters);
  store.drop_cluster_index();
  index_by_cluster(store, clusters);
  return train_cbmf(store, config.hp, clusters);
}

Snapshot make_snapshot(const CbmfModel& model, const RatingStore& store,
                       const ExperimentConfig& config) {
  Snapshot snap;
  snap.kind = ModelKind::cbmf;
  snap.scale = config.scale;
  snap.hp = config.hp;
  snap.model = model;
  snap.user_ids = store.users().raw_ids();
  snap.item_ids = store.items().raw_ids();
  std::int64_t created = 0;
  for (const StoredRating& r : store.ratings()) created = std::max(created, r.timestamp);
  snap.created = created;
  return snap;
}

enum class Predictor { basic, biased, cbmf };

std::vector<PredictionPair> predict_pairs(const RatingStore& store, std::span<const Rating> test,
                                          Predictor which, const FactorModel& factors,
                                          const BiasTable* biases, const CbmfModel* model) {
  std::vector<PredictionPair> pairs;
  pairs.reserve(test.size());
  for (const Rating& r : test) {
    const auto u = store.users().find(r.user);
    const auto i = store.items().find(r.item);
    if (!u || !i) throw Error("test rating outside the store universe");
    double pred = 0.0;
    switch (which) {
      case Predictor::basic: pred = predict_basic(factors, *u, *i); break;
      case Predictor::biased: pred = predict_biased(factors, *biases, *u, *i); break;
      case Predictor::cbmf: pred = predict_cbmf(*model, *u, *i); break;
    }
    pairs.push_back({pred, r.value});
  }
  return pairs;
}

std::int64_t pick_window(const ExperimentConfig& config, std::int64_t n) {
  std::int64_t w = config.window > 0 ? config.window : std::max<std::int64_t>(200, n / 20);
  return std::max<std::int64_t>(1, std::min(w, n));
}

ExperimentReport initial_quality(const ExperimentConfig& config, std::span<const Rating> ratings) {
  auto [train, test] = chronological_split(
      ratings, SplitSpec{config.test_fraction, SplitSpec::Mode::global_chronological},
      config.scale);
  ExperimentReport report;
  report.columns = {"model", "test_rmse", "train_rmse", "epochs"};

  auto add_row = [&](const std::string& label, const std::vector<PredictionPair>& test_pairs,
                     const std::vector<PredictionPair>& train_pairs, std::size_t epochs) {
    report.rows.push_back({label,
                           {rmse(test_pairs, config.clamp, config.scale),
                            rmse(train_pairs, config.clamp, config.scale),
                            static_cast<double>(epochs)}});
  };
  std::vector<Rating> train_as_ratings;
  train_as_ratings.reserve(static_cast<std::size_t>(train.n_ratings()));
  for (const StoredRating& r : train.ratings())
    train_as_ratings.push_back(
        Rating{train.users().raw(r.user), train.items().raw(r.item), r.value, r.timestamp});

  {
    TrainTrace trace;
    FactorModel basic = train_basic(train, config.hp, &trace);
    add_row("basic", predict_pairs(train, test, Predictor::basic, basic, nullptr, nullptr),
            predict_pairs(train, train_as_ratings, Predictor::basic, basic, nullptr, nullptr),
            trace.objective.size());
  }
  {
    TrainTrace trace;
    auto [factors, biases] = train_biased(train, config.hp, &trace);
    add_row("biased", predict_pairs(train, test, Predictor::biased, factors, &biases, nullptr),
            predict_pairs(train, train_as_ratings, Predictor::biased, factors, &biases, nullptr),
            trace.objective.size());
  }
  {
    Mat points = bootstrap_item_factors(train, config.hp, config.n_boot_iters);
    std::vector<int> assignment = kmeans(points, config.n_clusters, config.hp.seed);
    ClusterMap clusters = build_cluster_map(train, assignment, config.n_clusters);
    index_by_cluster(train, clusters);
    TrainTrace trace;
    CbmfModel model = train_cbmf(train, config.hp, clusters, &trace);
    add_row("cbmf", predict_pairs(train, test, Predictor::cbmf, model.factors, nullptr, &model),
            predict_pairs(train, train_as_ratings, Predictor::cbmf, model.factors, nullptr, &model),
            trace.objective.size());
  }
  return report;
}

ExperimentReport size_impact(const ExperimentConfig& config, std::span<const Rating> ratings) {
  auto [train, test] = chronological_split(
      ratings, SplitSpec{config.test_fraction, SplitSpec::Mode::global_chronological},
      config.scale);
  std::vector<RatingStore> ladder = build_chunk_ladder(train, config.n_chunks);

  ExperimentReport report;
  report.columns = {"model", "chunks", "test_rmse"};
  for (int k = 1; k <= config.n_chunks; ++k) {
    RatingStore& t_k = ladder[static_cast<std::size_t>(k - 1)];
    log_info("size-impact: T_" + std::to_string(k) + " has " + std::to_string(t_k.n_ratings()) +
             " ratings");
    {
      FactorModel basic = train_basic(t_k, config.hp);
      report.rows.push_back(
          {"basic",
           {static_cast<double>(k),
            rmse(predict_pairs(t_k, test, Predictor::basic, basic, nullptr, nullptr), config.clamp,
                 config.scale)}});
    }
    {
      auto [factors, biases] = train_biased(t_k, config.hp);
      report.rows.push_back(
          {"biased",
           {static_cast<double>(k),
            rmse(predict_pairs(t_k, test, Predictor::biased, factors, &biases, nullptr),
                 config.clamp, config.scale)}});
    }
    {
      CbmfModel model = train_cbmf_pipeline(t_k, config);
      report.rows.push_back(
          {"cbmf",
           {static_cast<double>(k),
            rmse(predict_pairs(t_k, test, Predictor::cbmf, model.factors, nullptr, &model),
                 config.clamp, config.scale)}});
    }
  }
  return report;
}

ExperimentReport offline_decay(const ExperimentConfig& config, std::span<const Rating> ratings) {
  auto [train, test] = chronological_split(
      ratings, SplitSpec{config.test_fraction, SplitSpec::Mode::global_chronological},
      config.scale);
  CbmfModel model = train_cbmf_pipeline(train, config);
  std::vector<Rating> stream = interleave_by_arrival(test);
  std::vector<PredictionPair> pairs =
      predict_pairs(train, stream, Predictor::cbmf, model.factors, nullptr, &model);
  const std::int64_t window = pick_window(config, static_cast<std::int64_t>(pairs.size()));
  auto windows = sliding_rmse(pairs, window, config.stride, config.clamp, config.scale);

  ExperimentReport report;
  report.columns = {"window", "end_position", "rmse"};
  int w = 0;
  for (const auto& [position, value] : windows)
    report.rows.push_back(
        {"w" + std::to_string(++w), {static_cast<double>(position), value}});
  return report;
}

ExperimentReport online_robustness(const ExperimentConfig& config, std::span<const Rating> ratings) {
  auto [train, test] = chronological_split(
      ratings, SplitSpec{config.test_fraction, SplitSpec::Mode::global_chronological},
      config.scale);
  CbmfModel model = train_cbmf_pipeline(train, config);
  std::vector<Rating> stream = interleave_by_arrival(test);

  std::vector<PredictionPair> frozen =
      predict_pairs(train, stream, Predictor::cbmf, model.factors, nullptr, &model);
  CbmfModel live = model;
  StreamResult online =
      integrate_stream(live, train, stream, config.mode, config.hp, true, config.online);
  if (online.predictions.size() != frozen.size())
    throw Error("online stream rejected ratings the frozen pass predicted");

  const std::int64_t window = pick_window(config, static_cast<std::int64_t>(frozen.size()));
  auto frozen_windows = sliding_rmse(frozen, window, config.stride, config.clamp, config.scale);
  auto online_windows =
      sliding_rmse(online.predictions, window, config.stride, config.clamp, config.scale);

  ExperimentReport report;
  report.columns = {"window", "end_position", "frozen_rmse", "online_rmse"};
  for (std::size_t w = 0; w < frozen_windows.size(); ++w)
    report.rows.push_back({"w" + std::to_string(w + 1),
                           {static_cast<double>(frozen_windows[w].first),
                            frozen_windows[w].second, online_windows[w].second}});
  return report;
}

ExperimentReport tradeoff(const ExperimentConfig& config, std::span<const Rating> ratings) {
  auto [train, test] = chronological_split(
      ratings, SplitSpec{config.test_fraction, SplitSpec::Mode::global_chronological},
      config.scale);
  CbmfModel model = train_cbmf_pipeline(train, config);
  std::vector<Rating> stream = interleave_by_arrival(test);
  const double frozen_rmse =
      rmse(predict_pairs(train, stream, Predictor::cbmf, model.factors, nullptr, &model),
           config.clamp, config.scale);

  ExperimentReport report;
  report.columns = {"mode", "prequential_rmse", "improvement_pct", "mean_update_ms"};
  for (IntegrationMode mode : {IntegrationMode::local_bias_only,
                               IntegrationMode::user_factors_only, IntegrationMode::both}) {
    CbmfModel live = model;
    RatingStore live_store = train;
    StreamResult result =
        integrate_stream(live, live_store, stream, mode, config.hp, true, config.online);
    const double preq = rmse(result.predictions, config.clamp, config.scale);
    report.rows.push_back({std::string(integration_mode_name(mode)),
                           {preq, (frozen_rmse - preq) / frozen_rmse * 100.0,
                            result.stats.mean_update_seconds() * 1e3}});
  }
  return report;
}

ExperimentReport refactorization(const ExperimentConfig& config, std::span<const Rating> ratings) {
  auto [train, test] = chronological_split(
      ratings, SplitSpec{config.test_fraction, SplitSpec::Mode::global_chronological},
      config.scale);
  CbmfModel initial = train_cbmf_pipeline(train, config);
  std::vector<Rating> stream = interleave_by_arrival(test);

  std::vector<std::size_t> bounds{0};
  for (double p : config.refactor_points)
    bounds.push_back(static_cast<std::size_t>(
        std::llround(p * static_cast<double>(stream.size()))));
  bounds.push_back(stream.size());
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s)
    if (bounds[s] >= bounds[s + 1])
      throw ParameterError("test stream is too small for the refactor points");

  ExperimentReport report;
  report.columns = {"segment", "online_rmse", "refactorized_rmse"};

  CbmfModel online_model = initial;
  RatingStore online_store = train;
  CbmfModel refac_model = initial;
  RatingStore refac_store = train;
  report.snapshots.push_back(make_snapshot(initial, train, config));

  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    std::span<const Rating> segment(stream.data() + bounds[s], bounds[s + 1] - bounds[s]);
    StreamResult online_result = integrate_stream(online_model, online_store, segment, config.mode,
                                                  config.hp, true, config.online);
    StreamResult refac_result = integrate_stream(refac_model, refac_store, segment, config.mode,
                                                 config.hp, true, config.online);
    report.rows.push_back(
        {"s" + std::to_string(s),
         {rmse(online_result.predictions, config.clamp, config.scale),
          rmse(refac_result.predictions, config.clamp, config.scale)}});
    if (s + 2 < bounds.size()) {
      refac_model = refactorize(refac_store, config.hp, config.n_clusters, config.hp.seed,
                                config.n_boot_iters);
      report.snapshots.push_back(make_snapshot(refac_model, refac_store, config));
    }
  }
  return report;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, std::span<const Rating> ratings) {
  config.validate();
  if (ratings.empty()) throw ParameterError("experiment needs a non-empty dataset");

  ExperimentReport report;
  if (config.name == "initial-quality") report = initial_quality(config, ratings);
  else if (config.name == "size-impact") report = size_impact(config, ratings);
  else if (config.name == "offline-decay") report = offline_decay(config, ratings);
  else if (config.name == "online-robustness") report = online_robustness(config, ratings);
  else if (config.name == "tradeoff") report = tradeoff(config, ratings);
  else report = refactorization(config, ratings);

  report.name = config.name;
  report.dataset_label = config.dataset_label;
  report.seed = config.hp.seed;
  report.config_json = config_echo(config);
  return report;
}

std::vector<std::string> write_report_files(const ExperimentReport& report,
                                            const std::string& out_dir) {
  fs::create_directories(out_dir);
  const std::string stem =
      report.name + "_" + report.dataset_label + "_" + format_int(static_cast<std::int64_t>(report.seed));

  std::vector<std::size_t> plain_cols, timing_cols;
  for (std::size_t c = 1; c < report.columns.size(); ++c) {
    if (report.columns[c].ends_with("_ms")) timing_cols.push_back(c);
    else plain_cols.push_back(c);
  }

  auto write_csv = [&](const std::string& path, const std::vector<std::size_t>& cols) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open report file: " + path);
    out << report.columns[0];
    for (std::size_t c : cols) out << ',' << report.columns[c];
    out << '\n';
    for (const auto& row : report.rows) {
      out << row.label;
      for (std::size_t c : cols) out << ',' << format_double(row.values[c - 1]);
      out << '\n';
    }
  };

  std::vector<std::string> written;
  const std::string csv_path = (fs::path(out_dir) / (stem + ".csv")).string();
  write_csv(csv_path, plain_cols);
  written.push_back(csv_path);
  if (!timing_cols.empty()) {
    const std::string timing_path =
        (fs::path(out_dir) / (report.name + "_timing_" + report.dataset_label + "_" +
                              format_int(static_cast<std::int64_t>(report.seed)) + ".csv"))
            .string();
    write_csv(timing_path, timing_cols);
    written.push_back(timing_path);
  }
  const std::string config_path = (fs::path(out_dir) / (stem + ".config.json")).string();
  {
    std::ofstream out(config_path, std::ios::binary);
    if (!out) throw Error("cannot open config echo file: " + config_path);
    out << report.config_json << '\n';
  }
  written.push_back(config_path);
  return written;
}

}  // namespace cbmf
