#include "cbmf/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include "cbmf/clustering.hpp"
#include "cbmf/experiments.hpp"
#include "cbmf/format.hpp"
#include "cbmf/log.hpp"
#include "cbmf/metrics.hpp"
#include "cbmf/online.hpp"
#include "cbmf/snapshot.hpp"

namespace cbmf {

namespace {

namespace fs = std::filesystem;

int run_guarded(const char* what, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ParameterError& err) {
    std::cerr << what << ": " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << what << ": " << err.what() << "\n";
    return 1;
  }
}

std::int64_t latest_timestamp(const RatingStore& store) {
  std::int64_t latest = 0;
  for (const StoredRating& r : store.ratings()) latest = std::max(latest, r.timestamp);
  return latest;
}

std::string dataset_label(const std::string& path) {
  std::string stem = fs::path(path).stem().string();
  return stem.empty() ? "dataset" : stem;
}

std::vector<PredictionPair> store_pairs(const RatingStore& store, const Snapshot& snap) {
  std::vector<PredictionPair> pairs;
  pairs.reserve(static_cast<std::size_t>(store.n_ratings()));
  for (const StoredRating& r : store.ratings())
    pairs.push_back({snapshot_predict(snap, r.user, r.item), r.value});
  return pairs;
}

}  // namespace

int cmd_train(const TrainArgs& args) {
  return run_guarded("train", [&] {
    const RatingFormat fmt = rating_format_from_name(args.format);
    const ModelKind kind = model_kind_from_name(args.model);
    args.hp.validate();
    if (args.out.empty()) throw ParameterError("missing output snapshot path");
    if (!(args.scale_max > args.scale_min))
      throw ParameterError("scale_max must exceed scale_min");

    const std::vector<Rating> ratings = parse_ratings_file(args.dataset, fmt);
    RatingStore store(ratings, RatingScale{args.scale_min, args.scale_max});
    log_info("train: " + std::to_string(store.n_ratings()) + " ratings, " +
             std::to_string(store.n_users()) + " users, " + std::to_string(store.n_items()) +
             " items");

    Snapshot snap;
    snap.kind = kind;
    snap.scale = store.scale();
    snap.hp = args.hp;
    snap.created = latest_timestamp(store);
    snap.user_ids = store.users().raw_ids();
    snap.item_ids = store.items().raw_ids();

    double objective = 0.0;
    switch (kind) {
      case ModelKind::basic: {
        snap.model.factors = train_basic(store, args.hp);
        snap.model.biases.user_bias = Vec::Zero(store.n_users());
        snap.model.biases.item_bias = Vec::Zero(store.n_items());
        snap.model.user_counts = CountVec::Zero(store.n_users());
        objective = regularized_sse(snap.model.factors, nullptr, store, args.hp);
        break;
      }
      case ModelKind::biased: {
        auto [factors, biases] = train_biased(store, args.hp);
        snap.model.factors = std::move(factors);
        snap.model.biases = std::move(biases);
        snap.model.user_counts = CountVec::Zero(store.n_users());
        objective = regularized_sse(snap.model.factors, &snap.model.biases, store, args.hp);
        break;
      }
      case ModelKind::cbmf: {
        Mat points = bootstrap_item_factors(store, args.hp, args.n_boot_iters);
        std::vector<int> assignment = kmeans(points, args.n_clusters, args.hp.seed);
        ClusterMap clusters = build_cluster_map(store, assignment, args.n_clusters);
        index_by_cluster(store, clusters);
        snap.model = train_cbmf(store, args.hp, clusters);
        objective = cbmf_objective(snap.model, store, args.hp);
        break;
      }
    }
    if (kind != ModelKind::cbmf) {
      snap.model.delta.resize(store.n_users(), 0);
      snap.model.cluster_counts.resize(store.n_users(), 0);
    }

    const double train_rmse = rmse(store_pairs(store, snap), true, store.scale());
    save_snapshot(args.out, snap);
    std::cout << "model " << model_kind_name(kind) << " objective " << format_double(objective)
              << " train_rmse " << format_double(train_rmse) << "\n";
    std::cout << "snapshot " << args.out << "\n";
  });
}

int cmd_stream(const StreamArgs& args) {
  return run_guarded("stream", [&] {
    const RatingFormat fmt = rating_format_from_name(args.format);
    const IntegrationMode mode = integration_mode_from_name(args.mode);
    if (args.max_passes < 1) throw ParameterError("max_passes must be >= 1");
    if (args.report_out.empty()) throw ParameterError("missing report output path");

    Snapshot snap = load_snapshot(args.snapshot);
    if (snap.kind != ModelKind::cbmf)
      throw ParameterError("stream integration needs a cbmf snapshot, got " +
                           std::string(model_kind_name(snap.kind)));

    const std::vector<Rating> base = parse_ratings_file(args.dataset, fmt);
    RatingStore store(base, snap.user_ids, snap.item_ids, snap.scale);
    store.build_cluster_index(snap.model.clusters.assignment, snap.model.n_clusters());

    const std::vector<Rating> stream = parse_ratings_file(args.stream, fmt);
    OnlineOptions opts;
    opts.max_passes = args.max_passes;
    StreamResult result =
        integrate_stream(snap.model, store, stream, mode, snap.hp, true, opts);

    {
      std::ofstream out(args.report_out, std::ios::binary);
      if (!out) throw Error("cannot open report file: " + args.report_out);
      out << "user,item,actual,predicted\n";
      for (std::size_t k = 0; k < result.predictions.size(); ++k) {
        const Rating& r = stream[result.integrated_indices[k]];
        out << r.user << ',' << r.item << ',' << format_double(result.predictions[k].actual)
            << ',' << format_double(result.predictions[k].predicted) << '\n';
      }
    }
    if (!args.stats_out.empty()) {
      std::ofstream out(args.stats_out, std::ios::binary);
      if (!out) throw Error("cannot open stats file: " + args.stats_out);
      out << "n_integrated,mode,mean_update_us\n";
      out << result.stats.ratings_integrated << ',' << integration_mode_name(mode) << ','
          << format_double(result.stats.mean_update_seconds() * 1e6) << '\n';
    }
    if (!args.snapshot_out.empty()) {
      snap.created = latest_timestamp(store);
      save_snapshot(args.snapshot_out, snap);
    }

    std::cout << "integrated " << result.stats.ratings_integrated << " rejected "
              << result.stats.ratings_rejected;
    if (!result.predictions.empty())
      std::cout << " prequential_rmse "
                << format_double(rmse(result.predictions, true, snap.scale));
    std::cout << "\n";
  });
}

int cmd_experiment(const ExperimentArgs& args) {
  return run_guarded("experiment", [&] {
    const RatingFormat fmt = rating_format_from_name(args.format);
    ExperimentConfig config;
    config.name = args.name;
    config.dataset_label = dataset_label(args.dataset);
    config.scale = RatingScale{args.scale_min, args.scale_max};
    config.hp = args.hp;
    config.n_clusters = args.n_clusters;
    config.n_boot_iters = args.n_boot_iters;
    config.n_chunks = args.n_chunks;
    config.test_fraction = args.test_fraction;
    config.window = args.window;
    config.stride = args.stride;
    config.mode = integration_mode_from_name(args.mode);
    config.online.max_passes = args.max_passes;
    config.validate();

    const std::vector<Rating> ratings = parse_ratings_file(args.dataset, fmt);
    ExperimentReport report = run_experiment(config, ratings);

    std::vector<std::string> written = write_report_files(report, args.out_dir);
    for (std::size_t k = 0; k < report.snapshots.size(); ++k) {
      const std::string path =
          (fs::path(args.out_dir) /
           (report.name + "_" + report.dataset_label + "_" +
            format_int(static_cast<std::int64_t>(report.seed)) + "_M" + std::to_string(k) +
            ".snap"))
              .string();
      save_snapshot(path, report.snapshots[k]);
      written.push_back(path);
    }
    for (const std::string& path : written) std::cout << "wrote " << path << "\n";
  });
}

int cmd_gen(const GenArgs& args) {
  return run_guarded("gen", [&] {
    const RatingFormat fmt = rating_format_from_name(args.format);
    if (args.out.empty()) throw ParameterError("missing output path");
    args.spec.validate();
    SyntheticData data = generate_synthetic(args.spec);
    write_ratings_file(args.out, data.ratings, fmt);
    std::cout << "wrote " << data.ratings.size() << " ratings for " << args.spec.n_users
              << " users x " << args.spec.n_items << " items to " << args.out << "\n";
  });
}

}  // namespace cbmf
