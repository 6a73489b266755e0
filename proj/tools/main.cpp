// Command-line front end: thin flag parsing over the command bodies in the
// core library. See README for usage examples.

#include <CLI11.hpp>

#include "cbmf/commands.hpp"

namespace {

void add_hyperparam_flags(CLI::App* cmd, cbmf::Hyperparams& hp) {
  cmd->add_option("--factors", hp.n_factors, "latent factor count");
  cmd->add_option("--lambda", hp.learning_rate, "SGD learning rate");
  cmd->add_option("--beta", hp.factor_reg, "factor regularizer");
  cmd->add_option("--gamma", hp.bias_reg, "bias regularizer");
  cmd->add_option("--max-iters", hp.max_iters, "training epoch cap");
  cmd->add_option("--min-rel-improve", hp.min_rel_improve,
                  "relative objective decrease that still counts as progress");
  cmd->add_option("--seed", hp.seed, "RNG seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cluster-based matrix factorization recommender"};
  app.require_subcommand(1);

  cbmf::TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model and write its snapshot");
  train_cmd->add_option("--dataset", train.dataset, "ratings file")->required();
  train_cmd->add_option("--format", train.format,
                        "movielens-tab | movielens-double-colon | netflix-per-movie | generic-csv");
  train_cmd->add_option("--model", train.model, "basic | biased | cbmf");
  add_hyperparam_flags(train_cmd, train.hp);
  train_cmd->add_option("--clusters", train.n_clusters, "item cluster count");
  train_cmd->add_option("--boot-iters", train.n_boot_iters,
                        "bootstrap factorization epochs before clustering");
  train_cmd->add_option("--scale-min", train.scale_min, "rating scale lower bound");
  train_cmd->add_option("--scale-max", train.scale_max, "rating scale upper bound");
  train_cmd->add_option("--out", train.out, "snapshot output path")->required();

  cbmf::StreamArgs stream;
  CLI::App* stream_cmd =
      app.add_subcommand("stream", "integrate a rating stream into a cbmf snapshot");
  stream_cmd->add_option("--snapshot", stream.snapshot, "trained cbmf snapshot")->required();
  stream_cmd->add_option("--dataset", stream.dataset, "ratings the snapshot was trained on")
      ->required();
  stream_cmd->add_option("--stream", stream.stream, "incoming ratings, in arrival order")
      ->required();
  stream_cmd->add_option("--format", stream.format, "rating file format");
  stream_cmd->add_option("--mode", stream.mode, "bias | factors | both");
  stream_cmd->add_option("--max-passes", stream.max_passes, "descent passes per rating");
  stream_cmd->add_option("--out", stream.report_out, "predictions CSV path")->required();
  stream_cmd->add_option("--stats-out", stream.stats_out, "integration stats CSV path");
  stream_cmd->add_option("--snapshot-out", stream.snapshot_out, "updated snapshot path");

  cbmf::ExperimentArgs experiment;
  CLI::App* experiment_cmd =
      app.add_subcommand("experiment", "run a scripted evaluation protocol");
  experiment_cmd->add_option("--name", experiment.name, "experiment name")->required();
  experiment_cmd->add_option("--dataset", experiment.dataset, "ratings file")->required();
  experiment_cmd->add_option("--format", experiment.format, "rating file format");
  experiment_cmd->add_option("--out-dir", experiment.out_dir, "directory for report files");
  add_hyperparam_flags(experiment_cmd, experiment.hp);
  experiment_cmd->add_option("--clusters", experiment.n_clusters, "item cluster count");
  experiment_cmd->add_option("--boot-iters", experiment.n_boot_iters,
                             "bootstrap factorization epochs");
  experiment_cmd->add_option("--chunks", experiment.n_chunks, "training-set ladder depth");
  experiment_cmd->add_option("--test-fraction", experiment.test_fraction,
                             "most-recent fraction held out for testing");
  experiment_cmd->add_option("--window", experiment.window, "sliding RMSE window (0 = auto)");
  experiment_cmd->add_option("--stride", experiment.stride, "sliding RMSE stride (0 = window/2)");
  experiment_cmd->add_option("--mode", experiment.mode, "bias | factors | both");
  experiment_cmd->add_option("--max-passes", experiment.max_passes, "descent passes per rating");
  experiment_cmd->add_option("--scale-min", experiment.scale_min, "rating scale lower bound");
  experiment_cmd->add_option("--scale-max", experiment.scale_max, "rating scale upper bound");

  cbmf::GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a planted-model synthetic dataset");
  gen_cmd->add_option("--out", gen.out, "output ratings file")->required();
  gen_cmd->add_option("--format", gen.format, "rating file format");
  gen_cmd->add_option("--users", gen.spec.n_users, "user count");
  gen_cmd->add_option("--items", gen.spec.n_items, "item count");
  gen_cmd->add_option("--clusters", gen.spec.n_clusters, "planted cluster count");
  gen_cmd->add_option("--mean-ratings", gen.spec.mean_ratings_per_user,
                      "mean ratings per user (at least 5 each)");
  gen_cmd->add_option("--rank", gen.spec.rank, "planted factor rank");
  gen_cmd->add_option("--cluster-spacing", gen.spec.cluster_mean_spacing,
                      "gap between planted cluster means");
  gen_cmd->add_option("--user-sd", gen.spec.user_offset_sd, "user offset sd");
  gen_cmd->add_option("--item-sd", gen.spec.item_offset_sd, "item offset sd");
  gen_cmd->add_option("--local-sd", gen.spec.local_offset_sd, "per-user-per-cluster offset sd");
  gen_cmd->add_option("--factor-sd", gen.spec.factor_sd, "factor entry sd");
  gen_cmd->add_option("--axis-boost", gen.spec.cluster_axis_boost,
                      "cluster signature strength in item factors");
  gen_cmd->add_option("--noise-sd", gen.spec.noise_sd, "observation noise sd");
  gen_cmd->add_option("--drift-sd", gen.spec.drift_sd,
                      "total drift of local offsets over the time span");
  gen_cmd->add_option("--scale-min", gen.spec.scale.min, "rating scale lower bound");
  gen_cmd->add_option("--scale-max", gen.spec.scale.max, "rating scale upper bound");
  gen_cmd->add_option("--t-begin", gen.spec.t_begin, "first timestamp");
  gen_cmd->add_option("--t-end", gen.spec.t_end, "one past the last timestamp");
  gen_cmd->add_option("--seed", gen.spec.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (train_cmd->parsed()) return cbmf::cmd_train(train);
  if (stream_cmd->parsed()) return cbmf::cmd_stream(stream);
  if (experiment_cmd->parsed()) return cbmf::cmd_experiment(experiment);
  if (gen_cmd->parsed()) return cbmf::cmd_gen(gen);
  return 2;
}
