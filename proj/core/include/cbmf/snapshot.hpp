#ifndef CBMF_SNAPSHOT_HPP
#define CBMF_SNAPSHOT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cbmf/cbmf_model.hpp"

namespace cbmf {

enum class ModelKind { basic, biased, cbmf };

ModelKind model_kind_from_name(std::string_view name);
std::string_view model_kind_name(ModelKind kind);

/// A trained model plus everything needed to use it stand-alone: scale,
/// hyperparameter echo and the raw id universe in dense-index order. The
/// CbmfModel member is the superset container; basic and biased snapshots
/// leave the cluster parts empty (and basic additionally has all-zero
/// biases).
struct Snapshot {
  ModelKind kind = ModelKind::basic;
  RatingScale scale;
  Hyperparams hp;
  std::int64_t created = 0;  // max training timestamp, for provenance
  CbmfModel model;
  std::vector<std::int64_t> user_ids;
  std::vector<std::int64_t> item_ids;
};

/// File format: a "CBMF1" line, text "key value" header lines, an "end"
/// line, then the arrays as little-endian 64-bit scalars in a fixed order,
/// and a trailing CRC-32 of everything before it. Same model, same bytes.
void save_snapshot(const std::string& path, const Snapshot& snap);

/// Throws VersionError on a foreign magic line, IntegrityError on length or
/// checksum damage.
Snapshot load_snapshot(const std::string& path);

/// Prediction through the snapshot's own kind.
double snapshot_predict(const Snapshot& snap, int u, int i);

}  // namespace cbmf

#endif  // CBMF_SNAPSHOT_HPP
