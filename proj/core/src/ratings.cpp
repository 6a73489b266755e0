#include "cbmf/ratings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "cbmf/format.hpp"

namespace cbmf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

bool parse_i64(std::string_view s, std::int64_t& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_f64(std::string_view s, double& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view line, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + sep.size();
  }
  return out;
}

unsigned days_in_month(int y, unsigned m) {
  static const unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2) {
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return leap ? 29 : 28;
  }
  return lengths[m - 1];
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yr + (m <= 2));
}

struct PairHash {
  std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& p) const {
    std::size_t h = std::hash<std::int64_t>()(p.first);
    h ^= std::hash<std::int64_t>()(p.second) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

class DuplicateGuard {
public:
  void check(std::int64_t user, std::int64_t item) {
    if (!seen_.emplace(user, item).second) throw DuplicateRatingError(user, item);
  }

private:
  std::unordered_set<std::pair<std::int64_t, std::int64_t>, PairHash> seen_;
};

Rating parse_delimited_line(std::string_view line, std::string_view sep, std::size_t lineno,
                            const std::string& raw) {
  auto fields = split(line, sep);
  if (fields.size() != 4) throw ParseError(lineno, raw, "expected 4 fields");
  Rating r;
  if (!parse_i64(trim(fields[0]), r.user)) throw ParseError(lineno, raw, "bad user id");
  if (!parse_i64(trim(fields[1]), r.item)) throw ParseError(lineno, raw, "bad item id");
  if (!parse_f64(trim(fields[2]), r.value)) throw ParseError(lineno, raw, "bad rating value");
  if (!(r.value > 0)) throw ParseError(lineno, raw, "rating value must be > 0");
  if (!parse_i64(trim(fields[3]), r.timestamp)) throw ParseError(lineno, raw, "bad timestamp");
  return r;
}

std::int64_t parse_netflix_date(std::string_view s, std::size_t lineno, const std::string& raw) {
  // YYYY-MM-DD, midnight UTC
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw ParseError(lineno, raw, "bad date");
  std::int64_t y = 0, m = 0, d = 0;
  if (!parse_i64(s.substr(0, 4), y) || !parse_i64(s.substr(5, 2), m) || !parse_i64(s.substr(8, 2), d))
    throw ParseError(lineno, raw, "bad date");
  if (m < 1 || m > 12 || d < 1 || d > days_in_month(static_cast<int>(y), static_cast<unsigned>(m)))
    throw ParseError(lineno, raw, "date out of range");
  return days_from_civil(static_cast<int>(y), static_cast<unsigned>(m), static_cast<unsigned>(d)) * 86400;
}

}  // namespace

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

RatingFormat rating_format_from_name(std::string_view name) {
  if (name == "movielens-tab") return RatingFormat::movielens_tab;
  if (name == "movielens-double-colon") return RatingFormat::movielens_double_colon;
  if (name == "netflix-per-movie") return RatingFormat::netflix_per_movie;
  if (name == "generic-csv") return RatingFormat::generic_csv;
  throw ParameterError("unknown rating format \"" + std::string(name) +
                       "\" (expected movielens-tab, movielens-double-colon, "
                       "netflix-per-movie or generic-csv)");
}

std::string_view rating_format_name(RatingFormat fmt) {
  switch (fmt) {
    case RatingFormat::movielens_tab: return "movielens-tab";
    case RatingFormat::movielens_double_colon: return "movielens-double-colon";
    case RatingFormat::netflix_per_movie: return "netflix-per-movie";
    case RatingFormat::generic_csv: return "generic-csv";
  }
  return "?";
}

std::vector<Rating> parse_ratings(std::istream& in, RatingFormat fmt) {
  std::vector<Rating> out;
  DuplicateGuard dupes;
  std::string raw;
  std::size_t lineno = 0;
  bool saw_csv_header = false;
  std::int64_t current_movie = 0;
  bool have_movie = false;

  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = trim(raw);
    if (line.empty()) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw ParseError(lineno, raw, "empty line");
    }
    switch (fmt) {
      case RatingFormat::movielens_tab:
        out.push_back(parse_delimited_line(line, "\t", lineno, raw));
        break;
      case RatingFormat::movielens_double_colon:
        out.push_back(parse_delimited_line(line, "::", lineno, raw));
        break;
      case RatingFormat::generic_csv: {
        if (!saw_csv_header) {
          if (line != "user,item,rating,timestamp")
            throw ParseError(lineno, raw, "expected header user,item,rating,timestamp");
          saw_csv_header = true;
          continue;
        }
        out.push_back(parse_delimited_line(line, ",", lineno, raw));
        break;
      }
      case RatingFormat::netflix_per_movie: {
        if (line.back() == ':') {
          std::int64_t movie = 0;
          if (!parse_i64(line.substr(0, line.size() - 1), movie))
            throw ParseError(lineno, raw, "bad movie header");
          current_movie = movie;
          have_movie = true;
          continue;
        }
        if (!have_movie) throw ParseError(lineno, raw, "rating line before movie header");
        auto fields = split(line, ",");
        if (fields.size() != 3) throw ParseError(lineno, raw, "expected user,rating,date");
        Rating r;
        r.item = current_movie;
        if (!parse_i64(trim(fields[0]), r.user)) throw ParseError(lineno, raw, "bad user id");
        if (!parse_f64(trim(fields[1]), r.value)) throw ParseError(lineno, raw, "bad rating value");
        if (!(r.value > 0)) throw ParseError(lineno, raw, "rating value must be > 0");
        r.timestamp = parse_netflix_date(trim(fields[2]), lineno, raw);
        out.push_back(r);
        break;
      }
    }
    dupes.check(out.back().user, out.back().item);
  }
  return out;
}

std::vector<Rating> parse_ratings_file(const std::string& path, RatingFormat fmt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open ratings file: " + path);
  return parse_ratings(in, fmt);
}

void serialize_ratings(std::ostream& out, std::span<const Rating> ratings, RatingFormat fmt) {
  if (fmt == RatingFormat::generic_csv) out << "user,item,rating,timestamp\n";
  bool have_movie = false;
  std::int64_t current_movie = 0;
  for (const Rating& r : ratings) {
    switch (fmt) {
      case RatingFormat::movielens_tab:
        out << r.user << '\t' << r.item << '\t' << format_double(r.value) << '\t' << r.timestamp << '\n';
        break;
      case RatingFormat::movielens_double_colon:
        out << r.user << "::" << r.item << "::" << format_double(r.value) << "::" << r.timestamp << '\n';
        break;
      case RatingFormat::generic_csv:
        out << r.user << ',' << r.item << ',' << format_double(r.value) << ',' << r.timestamp << '\n';
        break;
      case RatingFormat::netflix_per_movie: {
        if (!have_movie || current_movie != r.item) {
          out << r.item << ":\n";
          current_movie = r.item;
          have_movie = true;
        }
        int y = 0;
        unsigned m = 0, d = 0;
        civil_from_days(r.timestamp / 86400, y, m, d);
        char date[16];
        std::snprintf(date, sizeof(date), "%04d-%02u-%02u", y, m, d);
        out << r.user << ',' << format_double(r.value) << ',' << date << '\n';
        break;
      }
    }
  }
}

void write_ratings_file(const std::string& path, std::span<const Rating> ratings, RatingFormat fmt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path);
  serialize_ratings(out, ratings, fmt);
}

// ---- IdMap ------------------------------------------------------------------

int IdMap::intern(std::int64_t raw) {
  auto [it, inserted] = index_.try_emplace(raw, static_cast<int>(ids_.size()));
  if (inserted) ids_.push_back(raw);
  return it->second;
}

std::optional<int> IdMap::find(std::int64_t raw) const {
  auto it = index_.find(raw);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// ---- RatingStore ------------------------------------------------------------

RatingStore::RatingStore(std::span<const Rating> ratings, std::span<const Rating> universe,
                         RatingScale scale)
    : scale_(scale) {
  for (const Rating& r : universe) {
    users_.intern(r.user);
    items_.intern(r.item);
  }
  user_index_.resize(static_cast<std::size_t>(users_.size()));
  ratings_.reserve(ratings.size());
  std::unordered_set<std::int64_t> seen;
  seen.reserve(ratings.size() * 2);
  for (const Rating& r : ratings) {
    auto u = users_.find(r.user);
    auto i = items_.find(r.item);
    if (!u || !i)
      throw ParameterError("rating references an id outside the store universe");
    if (!(r.value > 0)) throw ParameterError("rating value must be > 0");
    std::int64_t key = static_cast<std::int64_t>(*u) * items_.size() + *i;
    if (!seen.insert(key).second) throw DuplicateRatingError(r.user, r.item);
    ratings_.push_back(StoredRating{*u, *i, r.value, r.timestamp});
    user_index_[static_cast<std::size_t>(*u)].push_back(static_cast<int>(ratings_.size()) - 1);
  }
  for (auto& list : user_index_) {
    std::stable_sort(list.begin(), list.end(), [this](int a, int b) {
      return ratings_[static_cast<std::size_t>(a)].timestamp <
             ratings_[static_cast<std::size_t>(b)].timestamp;
    });
  }
}

RatingStore::RatingStore(std::span<const Rating> ratings, RatingScale scale)
    : RatingStore(ratings, ratings, scale) {}

RatingStore::RatingStore(std::span<const Rating> ratings, std::span<const std::int64_t> user_ids,
                         std::span<const std::int64_t> item_ids, RatingScale scale)
    : scale_(scale) {
  for (std::int64_t raw : user_ids)
    if (users_.intern(raw) != users_.size() - 1)
      throw ParameterError("duplicate user id in universe list");
  for (std::int64_t raw : item_ids)
    if (items_.intern(raw) != items_.size() - 1)
      throw ParameterError("duplicate item id in universe list");
  user_index_.resize(static_cast<std::size_t>(users_.size()));
  ratings_.reserve(ratings.size());
  std::unordered_set<std::int64_t> seen;
  seen.reserve(ratings.size() * 2);
  for (const Rating& r : ratings) {
    auto u = users_.find(r.user);
    auto i = items_.find(r.item);
    if (!u || !i)
      throw ParameterError("rating references an id outside the store universe");
    if (!(r.value > 0)) throw ParameterError("rating value must be > 0");
    std::int64_t key = static_cast<std::int64_t>(*u) * items_.size() + *i;
    if (!seen.insert(key).second) throw DuplicateRatingError(r.user, r.item);
    ratings_.push_back(StoredRating{*u, *i, r.value, r.timestamp});
    user_index_[static_cast<std::size_t>(*u)].push_back(static_cast<int>(ratings_.size()) - 1);
  }
  for (auto& list : user_index_) {
    std::stable_sort(list.begin(), list.end(), [this](int a, int b) {
      return ratings_[static_cast<std::size_t>(a)].timestamp <
             ratings_[static_cast<std::size_t>(b)].timestamp;
    });
  }
}

const std::vector<int>& RatingStore::ratings_of(int user) const {
  return user_index_.at(static_cast<std::size_t>(user));
}

bool RatingStore::contains(int user, int item) const {
  for (int idx : ratings_of(user))
    if (ratings_[static_cast<std::size_t>(idx)].item == item) return true;
  return false;
}

std::optional<double> RatingStore::value_of(int user, int item) const {
  for (int idx : ratings_of(user))
    if (ratings_[static_cast<std::size_t>(idx)].item == item)
      return ratings_[static_cast<std::size_t>(idx)].value;
  return std::nullopt;
}

double RatingStore::mean_rating() const {
  if (ratings_.empty()) return 0.0;
  double sum = 0.0;
  for (const StoredRating& r : ratings_) sum += r.value;
  return sum / static_cast<double>(ratings_.size());
}

void RatingStore::build_cluster_index(std::span<const int> item_clusters, int n_clusters) {
  if (static_cast<int>(item_clusters.size()) != n_items())
    throw ParameterError("cluster assignment size does not match item count");
  if (n_clusters < 1) throw ParameterError("need at least one cluster");
  for (int i = 0; i < n_items(); ++i) {
    int c = item_clusters[static_cast<std::size_t>(i)];
    if (c < 0 || c >= n_clusters)
      throw ParameterError("item " + std::to_string(items_.raw(i)) +
                           " has no valid cluster assignment");
  }
  item_cluster_.assign(item_clusters.begin(), item_clusters.end());
  n_clusters_ = n_clusters;
  user_cluster_index_.assign(static_cast<std::size_t>(n_users()),
                             std::vector<std::vector<int>>(static_cast<std::size_t>(n_clusters)));
  for (int u = 0; u < n_users(); ++u) {
    for (int idx : user_index_[static_cast<std::size_t>(u)]) {
      int c = item_cluster_[static_cast<std::size_t>(ratings_[static_cast<std::size_t>(idx)].item)];
      user_cluster_index_[static_cast<std::size_t>(u)][static_cast<std::size_t>(c)].push_back(idx);
    }
  }
}

void RatingStore::drop_cluster_index() {
  n_clusters_ = 0;
  item_cluster_.clear();
  user_cluster_index_.clear();
}

const std::vector<int>& RatingStore::cluster_ratings_of(int user, int cluster) const {
  if (!has_cluster_index()) throw Error("cluster index has not been built");
  return user_cluster_index_.at(static_cast<std::size_t>(user)).at(static_cast<std::size_t>(cluster));
}

int RatingStore::append(const Rating& r) {
  auto u = users_.find(r.user);
  auto i = items_.find(r.item);
  if (!u) throw RejectionError("unknown user " + std::to_string(r.user));
  if (!i) throw RejectionError("unknown item " + std::to_string(r.item));
  if (contains(*u, *i))
    throw RejectionError("duplicate rating for user " + std::to_string(r.user) +
                         ", item " + std::to_string(r.item));
  if (!(r.value > 0)) throw RejectionError("rating value must be > 0");
  ratings_.push_back(StoredRating{*u, *i, r.value, r.timestamp});
  int rating_index = static_cast<int>(ratings_.size()) - 1;
  insert_into_indexes(rating_index);
  return rating_index;
}

void RatingStore::insert_into_indexes(int rating_index) {
  const StoredRating& r = ratings_[static_cast<std::size_t>(rating_index)];
  auto by_ts = [this](int idx, std::int64_t ts) {
    return ratings_[static_cast<std::size_t>(idx)].timestamp <= ts;
  };
  auto& list = user_index_[static_cast<std::size_t>(r.user)];
  auto pos = std::find_if_not(list.begin(), list.end(),
                              [&](int idx) { return by_ts(idx, r.timestamp); });
  list.insert(pos, rating_index);
  if (has_cluster_index()) {
    int c = item_cluster_[static_cast<std::size_t>(r.item)];
    auto& clist = user_cluster_index_[static_cast<std::size_t>(r.user)][static_cast<std::size_t>(c)];
    auto cpos = std::find_if_not(clist.begin(), clist.end(),
                                 [&](int idx) { return by_ts(idx, r.timestamp); });
    clist.insert(cpos, rating_index);
  }
}

RatingStore RatingStore::subset(std::span<const int> rating_indices) const {
  RatingStore out;
  out.scale_ = scale_;
  out.users_ = users_;
  out.items_ = items_;
  out.user_index_.resize(static_cast<std::size_t>(n_users()));
  out.ratings_.reserve(rating_indices.size());
  for (int idx : rating_indices) {
    const StoredRating& r = ratings_.at(static_cast<std::size_t>(idx));
    out.ratings_.push_back(r);
    out.user_index_[static_cast<std::size_t>(r.user)].push_back(
        static_cast<int>(out.ratings_.size()) - 1);
  }
  for (auto& list : out.user_index_) {
    std::stable_sort(list.begin(), list.end(), [&out](int a, int b) {
      return out.ratings_[static_cast<std::size_t>(a)].timestamp <
             out.ratings_[static_cast<std::size_t>(b)].timestamp;
    });
  }
  if (has_cluster_index()) out.build_cluster_index(item_cluster_, n_clusters_);
  return out;
}

// ---- splits, chunks, interleave --------------------------------------------

std::pair<RatingStore, std::vector<Rating>> chronological_split(
    std::span<const Rating> ratings, const SplitSpec& spec, RatingScale scale) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0))
    throw ParameterError("test_fraction must lie in (0, 1)");
  if (ratings.empty()) throw ParameterError("cannot split an empty rating list");

  std::vector<char> in_test(ratings.size(), 0);
  if (spec.mode == SplitSpec::Mode::global_chronological) {
    auto n_test = static_cast<std::size_t>(
        std::llround(spec.test_fraction * static_cast<double>(ratings.size())));
    std::vector<std::size_t> order(ratings.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ratings[a].timestamp < ratings[b].timestamp;
    });
    for (std::size_t k = order.size() - n_test; k < order.size(); ++k) in_test[order[k]] = 1;
  } else {
    // most recent fraction of each user's own ratings
    std::unordered_map<std::int64_t, std::vector<std::size_t>> per_user;
    for (std::size_t i = 0; i < ratings.size(); ++i) per_user[ratings[i].user].push_back(i);
    for (auto& [user, positions] : per_user) {
      std::stable_sort(positions.begin(), positions.end(), [&](std::size_t a, std::size_t b) {
        return ratings[a].timestamp < ratings[b].timestamp;
      });
      auto n_test = static_cast<std::size_t>(
          std::llround(spec.test_fraction * static_cast<double>(positions.size())));
      for (std::size_t k = positions.size() - n_test; k < positions.size(); ++k)
        in_test[positions[k]] = 1;
    }
  }

  std::vector<Rating> train_list, test;
  for (std::size_t i = 0; i < ratings.size(); ++i)
    (in_test[i] ? test : train_list).push_back(ratings[i]);
  RatingStore train(train_list, ratings, scale);
  return {std::move(train), std::move(test)};
}

std::vector<RatingStore> build_chunk_ladder(const RatingStore& train, int n_chunks) {
  if (n_chunks < 1) throw ParameterError("n_chunks must be >= 1");
  const int n = n_chunks;
  std::vector<int> chunk_of(static_cast<std::size_t>(train.n_ratings()), 0);
  for (int u = 0; u < train.n_users(); ++u) {
    const auto& list = train.ratings_of(u);
    const int n_u = static_cast<int>(list.size());
    const int base = n_u / n;
    const int rem = n_u % n;
    int pos = 0;
    for (int c = 0; c < n; ++c) {
      int size_c = base + (c >= n - rem ? 1 : 0);
      for (int s = 0; s < size_c; ++s) chunk_of[static_cast<std::size_t>(list[pos++])] = c;
    }
  }
  std::vector<RatingStore> ladder;
  ladder.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    std::vector<int> keep;
    for (std::int64_t idx = 0; idx < train.n_ratings(); ++idx)
      if (chunk_of[static_cast<std::size_t>(idx)] >= n - k) keep.push_back(static_cast<int>(idx));
    ladder.push_back(train.subset(keep));
  }
  return ladder;
}

std::vector<Rating> interleave_by_arrival(std::span<const Rating> test) {
  std::unordered_map<std::int64_t, std::size_t> slot_of;
  std::vector<std::vector<std::size_t>> per_user;
  for (std::size_t i = 0; i < test.size(); ++i) {
    auto [it, inserted] = slot_of.try_emplace(test[i].user, per_user.size());
    if (inserted) per_user.emplace_back();
    per_user[it->second].push_back(i);
  }
  for (auto& positions : per_user) {
    std::stable_sort(positions.begin(), positions.end(), [&](std::size_t a, std::size_t b) {
      return test[a].timestamp < test[b].timestamp;
    });
  }
  std::vector<Rating> out;
  out.reserve(test.size());
  for (std::size_t rank = 0; out.size() < test.size(); ++rank)
    for (const auto& positions : per_user)
      if (rank < positions.size()) out.push_back(test[positions[rank]]);
  return out;
}

}  // namespace cbmf
