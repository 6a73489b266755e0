#ifndef CBMF_EXPERIMENTS_HPP
#define CBMF_EXPERIMENTS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cbmf/online.hpp"
#include "cbmf/ratings.hpp"
#include "cbmf/snapshot.hpp"

namespace cbmf {

/// The scripted evaluation protocols. Each one splits the input
/// chronologically, trains what it needs and reports one metric table.
///
///   initial-quality    train/test RMSE of the three model kinds
///   size-impact        RMSE per model over the nested T_1..T_n ladder
///   offline-decay      sliding-window RMSE of a frozen model on the
///                      arrival-ordered test stream
///   online-robustness  offline-decay plus the same stream with online
///                      integration, window by window
///   tradeoff           prequential RMSE and update cost per integration
///                      mode
///   refactorization    online lineage vs. a lineage refactorized at the
///                      configured stream positions; snapshots per stage
const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
  std::string name;
  std::string dataset_label = "synthetic";
  RatingScale scale;
  Hyperparams hp;
  int n_clusters = 3;
  int n_boot_iters = 10;
  double test_fraction = 0.02;
  int n_chunks = 10;                    // size-impact
  std::int64_t window = 0;              // 0 picks max(200, |stream|/20), capped at |stream|
  std::int64_t stride = 0;              // 0 picks window/2
  IntegrationMode mode = IntegrationMode::local_bias_only;
  OnlineOptions online;
  std::vector<double> refactor_points = {0.2, 0.4, 0.6, 0.8};
  bool clamp = true;

  void validate() const;
};

/// One metric table: columns[0] names the label column, every row carries
/// one value per remaining column. Timing columns are named *_ms so report
/// writers can keep them out of the reproducible files.
struct ExperimentReport {
  std::string name;
  std::string dataset_label;
  std::uint64_t seed = 0;
  std::vector<std::string> columns;
  struct Row {
    std::string label;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  std::string config_json;
  std::vector<Snapshot> snapshots;  // refactorization: the M_0..M_n stages
};

ExperimentReport run_experiment(const ExperimentConfig& config, std::span<const Rating> ratings);

/// Writes <name>_<dataset>_<seed>.csv, the config echo next to it, and
/// timing columns (if any) into a separate <name>_timing_... file, since
/// wall-clock values cannot be byte-reproducible. Returns the paths.
std::vector<std::string> write_report_files(const ExperimentReport& report,
                                            const std::string& out_dir);

}  // namespace cbmf

#endif  // CBMF_EXPERIMENTS_HPP
