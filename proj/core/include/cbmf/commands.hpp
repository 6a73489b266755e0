#ifndef CBMF_COMMANDS_HPP
#define CBMF_COMMANDS_HPP

#include <cstdint>
#include <string>

#include "cbmf/mf.hpp"
#include "cbmf/synthetic.hpp"

namespace cbmf {

// Command bodies behind the CLI, shaped so tests can drive them directly.
// Exit codes: 0 success, 2 bad parameters or usage, 1 anything else
// (IO, parse, training failures).

struct TrainArgs {
  std::string dataset;
  std::string format = "generic-csv";
  std::string model = "cbmf";
  Hyperparams hp;
  int n_clusters = 3;
  int n_boot_iters = 10;
  double scale_min = 1.0;
  double scale_max = 5.0;
  std::string out;
};

/// Trains the requested model kind on the whole dataset file, writes the
/// snapshot to args.out, prints the final objective and train RMSE.
int cmd_train(const TrainArgs& args);

struct StreamArgs {
  std::string snapshot;
  std::string dataset;  // the ratings the snapshot was trained on
  std::string stream;
  std::string format = "generic-csv";
  std::string mode = "bias";
  int max_passes = 20;
  std::string report_out;
  std::string stats_out;     // optional; wall-clock numbers, not reproducible
  std::string snapshot_out;  // optional updated snapshot
};

/// Replays a rating stream against a cbmf snapshot prequentially: predicts
/// each rating, integrates it, and writes a user,item,actual,predicted row
/// per integrated rating.
int cmd_stream(const StreamArgs& args);

struct ExperimentArgs {
  std::string name;
  std::string dataset;
  std::string format = "generic-csv";
  std::string out_dir = ".";
  Hyperparams hp;
  int n_clusters = 3;
  int n_boot_iters = 10;
  int n_chunks = 10;
  double test_fraction = 0.02;
  std::int64_t window = 0;
  std::int64_t stride = 0;
  std::string mode = "bias";
  int max_passes = 20;
  double scale_min = 1.0;
  double scale_max = 5.0;
};

/// Runs one named experiment and writes its report files (and, for
/// refactorization, the stage snapshots) under out_dir.
int cmd_experiment(const ExperimentArgs& args);

struct GenArgs {
  SyntheticSpec spec;
  std::string format = "generic-csv";
  std::string out;
};

/// Writes a planted-model synthetic dataset.
int cmd_gen(const GenArgs& args);

}  // namespace cbmf

#endif  // CBMF_COMMANDS_HPP
