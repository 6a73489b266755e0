#ifndef CBMF_RATINGS_HPP
#define CBMF_RATINGS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cbmf/errors.hpp"

namespace cbmf {

/// Bounds of the rating scale, e.g. [1, 5]. Read from a dataset descriptor,
/// never inferred from the data.
struct RatingScale {
  double min = 1.0;
  double max = 5.0;

  double clamp(double v) const { return v < min ? min : (v > max ? max : v); }
};

/// One (user, item, value, timestamp) observation with raw dataset ids.
struct Rating {
  std::int64_t user = 0;
  std::int64_t item = 0;
  double value = 0.0;
  std::int64_t timestamp = 0;

  bool operator==(const Rating&) const = default;
};

enum class RatingFormat {
  movielens_tab,           // user<TAB>item<TAB>rating<TAB>timestamp
  movielens_double_colon,  // user::item::rating::timestamp
  netflix_per_movie,       // "movieid:" header, then user,rating,YYYY-MM-DD
  generic_csv,             // header user,item,rating,timestamp
};

RatingFormat rating_format_from_name(std::string_view name);
std::string_view rating_format_name(RatingFormat fmt);

/// Days since 1970-01-01 for a proleptic Gregorian date; negative before epoch.
std::int64_t days_from_civil(int year, unsigned month, unsigned day);

std::vector<Rating> parse_ratings(std::istream& in, RatingFormat fmt);
std::vector<Rating> parse_ratings_file(const std::string& path, RatingFormat fmt);
void serialize_ratings(std::ostream& out, std::span<const Rating> ratings, RatingFormat fmt);
void write_ratings_file(const std::string& path, std::span<const Rating> ratings, RatingFormat fmt);

/// Raw id <-> dense index mapping in first-appearance order.
class IdMap {
public:
  int intern(std::int64_t raw);
  std::optional<int> find(std::int64_t raw) const;
  std::int64_t raw(int index) const { return ids_[static_cast<std::size_t>(index)]; }
  int size() const { return static_cast<int>(ids_.size()); }
  const std::vector<std::int64_t>& raw_ids() const { return ids_; }

private:
  std::unordered_map<std::int64_t, int> index_;
  std::vector<std::int64_t> ids_;
};

/// A rating mapped into the dense index space of its store.
struct StoredRating {
  int user = 0;
  int item = 0;
  double value = 0.0;
  std::int64_t timestamp = 0;
};

/// Sparse rating collection with a user-major view and an optional
/// (user, cluster) view built after clustering.
///
/// Stores are built single-threaded, then used immutably; appends only happen
/// through the online-integration path, which requires exclusive access.
class RatingStore {
public:
  RatingStore() = default;

  /// Build from ratings; the id universe is taken from `universe` (first
  /// appearance order), which must be a superset of `ratings`. Typically
  /// `universe` is the full dataset and `ratings` the training subset, so
  /// that model dimensions cover the test entities too.
  RatingStore(std::span<const Rating> ratings, std::span<const Rating> universe,
              RatingScale scale);
  RatingStore(std::span<const Rating> ratings, RatingScale scale);

  /// Universe given as explicit id lists (dense index = list position), as
  /// stored in a model snapshot.
  RatingStore(std::span<const Rating> ratings, std::span<const std::int64_t> user_ids,
              std::span<const std::int64_t> item_ids, RatingScale scale);

  int n_users() const { return users_.size(); }
  int n_items() const { return items_.size(); }
  std::int64_t n_ratings() const { return static_cast<std::int64_t>(ratings_.size()); }
  const RatingScale& scale() const { return scale_; }

  const std::vector<StoredRating>& ratings() const { return ratings_; }
  const IdMap& users() const { return users_; }
  const IdMap& items() const { return items_; }

  /// Indices into ratings() for one user, ordered by timestamp (stable).
  const std::vector<int>& ratings_of(int user) const;

  bool contains(int user, int item) const;
  std::optional<double> value_of(int user, int item) const;

  /// Arithmetic mean of all rating values, accumulated in insertion order.
  double mean_rating() const;

  // ---- (user, cluster) view -------------------------------------------------

  bool has_cluster_index() const { return n_clusters_ > 0; }
  int n_index_clusters() const { return n_clusters_; }

  /// Builds the per-(user, cluster) index from an item -> cluster assignment.
  /// Every item of the store must be assigned. Requires exclusive access.
  void build_cluster_index(std::span<const int> item_clusters, int n_clusters);
  void drop_cluster_index();

  /// Indices into ratings() for one user restricted to one cluster,
  /// ordered by timestamp. Requires the cluster index.
  const std::vector<int>& cluster_ratings_of(int user, int cluster) const;

  // ---- online append --------------------------------------------------------

  /// Appends one rating whose ids are already in the universe. Keeps the
  /// user view (and the cluster view, when present) ordered. Returns the
  /// index of the new rating. Throws RejectionError for unknown ids or
  /// duplicates.
  int append(const Rating& r);

  /// A new store with the same universe, scale and cluster assignment,
  /// holding the listed ratings (given as indices into ratings(), kept in
  /// the given order).
  RatingStore subset(std::span<const int> rating_indices) const;

private:
  void insert_into_indexes(int rating_index);

  RatingScale scale_;
  IdMap users_;
  IdMap items_;
  std::vector<StoredRating> ratings_;
  std::vector<std::vector<int>> user_index_;

  int n_clusters_ = 0;
  std::vector<int> item_cluster_;                       // item -> cluster
  std::vector<std::vector<std::vector<int>>> user_cluster_index_;  // [user][cluster]
};

struct SplitSpec {
  double test_fraction = 0.02;
  enum class Mode { global_chronological, per_user_chronological };
  Mode mode = Mode::global_chronological;
};

/// Splits into a training store and a test list. In global mode the test set
/// is the round(test_fraction * n) most recent ratings; timestamp ties are
/// broken by stable input order. The store's id universe covers the whole
/// input so train and test share one index space.
std::pair<RatingStore, std::vector<Rating>> chronological_split(
    std::span<const Rating> ratings, const SplitSpec& spec, RatingScale scale);

/// Nested training sets T_1 ... T_n: each user's time-ordered ratings are cut
/// into n consecutive chunks of near-equal size (remainder assigned to the
/// most recent chunks), and T_k is the union of the k most recent chunks.
std::vector<RatingStore> build_chunk_ladder(const RatingStore& train, int n_chunks);

/// Reorders a test set by arrival position: every user's i-th rating precedes
/// every user's (i+1)-th, and each user's own order (by timestamp) is kept.
std::vector<Rating> interleave_by_arrival(std::span<const Rating> test);

}  // namespace cbmf

#endif  // CBMF_RATINGS_HPP
