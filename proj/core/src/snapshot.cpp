#include "cbmf/snapshot.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <zlib.h>

#include "cbmf/format.hpp"
#include "cbmf/mf.hpp"

namespace cbmf {

ModelKind model_kind_from_name(std::string_view name) {
  if (name == "basic") return ModelKind::basic;
  if (name == "biased") return ModelKind::biased;
  if (name == "cbmf") return ModelKind::cbmf;
  throw ParameterError("unknown model kind \"" + std::string(name) +
                       "\" (expected basic, biased or cbmf)");
}

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::basic: return "basic";
    case ModelKind::biased: return "biased";
    case ModelKind::cbmf: return "cbmf";
  }
  return "?";
}

namespace {

constexpr std::string_view kMagic = "CBMF1";

void append_raw(std::string& out, const void* data, std::size_t n) {
  out.append(static_cast<const char*>(data), n);
}

void append_doubles(std::string& out, const double* data, std::size_t n) {
  append_raw(out, data, n * sizeof(double));
}

void append_i64(std::string& out, const std::int64_t* data, std::size_t n) {
  append_raw(out, data, n * sizeof(std::int64_t));
}

struct Reader {
  const char* pos;
  const char* end;

  void read_raw(void* out, std::size_t n) {
    if (static_cast<std::size_t>(end - pos) < n)
      throw IntegrityError("snapshot payload is shorter than its header declares");
    std::memcpy(out, pos, n);
    pos += n;
  }
  void read_doubles(double* out, std::size_t n) { read_raw(out, n * sizeof(double)); }
  void read_i64(std::int64_t* out, std::size_t n) { read_raw(out, n * sizeof(std::int64_t)); }
};

std::uint32_t checksum(const std::string& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()),
              static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::int64_t header_int(const std::map<std::string, std::string>& fields, const std::string& key) {
  auto it = fields.find(key);
  if (it == fields.end()) throw IntegrityError("snapshot header misses field " + key);
  std::int64_t v = 0;
  auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (res.ec != std::errc() || res.ptr != it->second.data() + it->second.size())
    throw IntegrityError("snapshot header field " + key + " is not an integer");
  return v;
}

double header_double(const std::map<std::string, std::string>& fields, const std::string& key) {
  auto it = fields.find(key);
  if (it == fields.end()) throw IntegrityError("snapshot header misses field " + key);
  double v = 0;
  auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (res.ec != std::errc() || res.ptr != it->second.data() + it->second.size())
    throw IntegrityError("snapshot header field " + key + " is not a number");
  return v;
}

}  // namespace

void save_snapshot(const std::string& path, const Snapshot& snap) {
  const int n_users = snap.model.n_users();
  const int n_items = snap.model.n_items();
  const int n_clusters = snap.model.n_clusters();
  if (static_cast<int>(snap.user_ids.size()) != n_users ||
      static_cast<int>(snap.item_ids.size()) != n_items)
    throw ParameterError("snapshot id lists do not match the model dimensions");
  if (snap.model.biases.user_bias.size() != n_users ||
      snap.model.biases.item_bias.size() != n_items ||
      snap.model.user_counts.size() != n_users ||
      snap.model.delta.rows() != n_users || snap.model.delta.cols() != n_clusters ||
      snap.model.cluster_counts.rows() != n_users ||
      snap.model.cluster_counts.cols() != n_clusters ||
      static_cast<int>(snap.model.clusters.cluster_mean.size()) != n_clusters ||
      (n_clusters > 0 && static_cast<int>(snap.model.clusters.assignment.size()) != n_items))
    throw ParameterError("snapshot model arrays are inconsistent with its dimensions");

  std::string out;
  out.append(kMagic).push_back('\n');
  auto field = [&out](std::string_view key, const std::string& value) {
    out.append(key);
    out.push_back(' ');
    out.append(value);
    out.push_back('\n');
  };
  field("kind", std::string(model_kind_name(snap.kind)));
  field("n_users", format_int(n_users));
  field("n_items", format_int(n_items));
  field("n_factors", format_int(snap.model.factors.n_factors()));
  field("n_clusters", format_int(n_clusters));
  field("scale_min", format_double(snap.scale.min));
  field("scale_max", format_double(snap.scale.max));
  field("learning_rate", format_double(snap.hp.learning_rate));
  field("factor_reg", format_double(snap.hp.factor_reg));
  field("bias_reg", format_double(snap.hp.bias_reg));
  field("max_iters", format_int(snap.hp.max_iters));
  field("min_rel_improve", format_double(snap.hp.min_rel_improve));
  field("seed", format_int(static_cast<std::int64_t>(snap.hp.seed)));
  field("created", format_int(snap.created));
  out.append("end\n");

  append_doubles(out, snap.model.factors.user_factors.data(),
                 snap.model.factors.user_factors.size());
  append_doubles(out, snap.model.factors.item_factors.data(),
                 snap.model.factors.item_factors.size());
  append_doubles(out, &snap.model.factors.global_mean, 1);
  append_doubles(out, snap.model.clusters.cluster_mean.data(),
                 snap.model.clusters.cluster_mean.size());
  append_doubles(out, snap.model.biases.item_bias.data(), snap.model.biases.item_bias.size());
  append_doubles(out, snap.model.biases.user_bias.data(), snap.model.biases.user_bias.size());
  append_doubles(out, snap.model.delta.data(), snap.model.delta.size());
  append_i64(out, snap.model.user_counts.data(), snap.model.user_counts.size());
  append_i64(out, snap.model.cluster_counts.data(), snap.model.cluster_counts.size());
  if (n_clusters > 0) {
    std::vector<std::int64_t> assignment(snap.model.clusters.assignment.begin(),
                                         snap.model.clusters.assignment.end());
    append_i64(out, assignment.data(), assignment.size());
  }
  append_i64(out, snap.user_ids.data(), snap.user_ids.size());
  append_i64(out, snap.item_ids.data(), snap.item_ids.size());

  const std::uint32_t crc = checksum(out);
  append_raw(out, &crc, sizeof(crc));

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot open snapshot file for writing: " + path);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("failed writing snapshot file: " + path);
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open snapshot file: " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  std::string bytes = std::move(buffer).str();

  if (bytes.size() < sizeof(std::uint32_t) + kMagic.size() + 1)
    throw IntegrityError("snapshot file is too short");
  std::uint32_t stored_crc = 0;
  std::memcpy(&stored_crc, bytes.data() + bytes.size() - sizeof(stored_crc), sizeof(stored_crc));
  bytes.resize(bytes.size() - sizeof(stored_crc));
  if (checksum(bytes) != stored_crc) throw IntegrityError("snapshot checksum mismatch");

  std::size_t pos = 0;
  auto next_line = [&bytes, &pos]() {
    std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string::npos) throw IntegrityError("snapshot header is truncated");
    std::string line = bytes.substr(pos, eol - pos);
    pos = eol + 1;
    return line;
  };

  const std::string magic = next_line();
  if (magic != kMagic) throw VersionError(magic, std::string(kMagic));

  std::map<std::string, std::string> fields;
  while (true) {
    std::string line = next_line();
    if (line == "end") break;
    std::size_t space = line.find(' ');
    if (space == std::string::npos) throw IntegrityError("malformed snapshot header line");
    fields.emplace(line.substr(0, space), line.substr(space + 1));
  }

  Snapshot snap;
  {
    auto it = fields.find("kind");
    if (it == fields.end()) throw IntegrityError("snapshot header misses field kind");
    snap.kind = model_kind_from_name(it->second);
  }
  const auto n_users = header_int(fields, "n_users");
  const auto n_items = header_int(fields, "n_items");
  const auto n_factors = header_int(fields, "n_factors");
  const auto n_clusters = header_int(fields, "n_clusters");
  if (n_users < 1 || n_items < 1 || n_factors < 1 || n_clusters < 0)
    throw IntegrityError("snapshot header declares impossible dimensions");
  snap.scale.min = header_double(fields, "scale_min");
  snap.scale.max = header_double(fields, "scale_max");
  snap.hp.n_factors = static_cast<int>(n_factors);
  snap.hp.learning_rate = header_double(fields, "learning_rate");
  snap.hp.factor_reg = header_double(fields, "factor_reg");
  snap.hp.bias_reg = header_double(fields, "bias_reg");
  snap.hp.max_iters = static_cast<int>(header_int(fields, "max_iters"));
  snap.hp.min_rel_improve = header_double(fields, "min_rel_improve");
  snap.hp.seed = static_cast<std::uint64_t>(header_int(fields, "seed"));
  snap.created = header_int(fields, "created");

  Reader reader{bytes.data() + pos, bytes.data() + bytes.size()};
  snap.model.factors.user_factors.resize(n_users, n_factors);
  snap.model.factors.item_factors.resize(n_items, n_factors);
  reader.read_doubles(snap.model.factors.user_factors.data(),
                      snap.model.factors.user_factors.size());
  reader.read_doubles(snap.model.factors.item_factors.data(),
                      snap.model.factors.item_factors.size());
  reader.read_doubles(&snap.model.factors.global_mean, 1);
  snap.model.clusters.n_clusters = static_cast<int>(n_clusters);
  snap.model.clusters.cluster_mean.resize(static_cast<std::size_t>(n_clusters));
  reader.read_doubles(snap.model.clusters.cluster_mean.data(),
                      snap.model.clusters.cluster_mean.size());
  snap.model.biases.item_bias.resize(n_items);
  reader.read_doubles(snap.model.biases.item_bias.data(), snap.model.biases.item_bias.size());
  snap.model.biases.user_bias.resize(n_users);
  reader.read_doubles(snap.model.biases.user_bias.data(), snap.model.biases.user_bias.size());
  snap.model.delta.resize(n_users, n_clusters);
  reader.read_doubles(snap.model.delta.data(), snap.model.delta.size());
  snap.model.user_counts.resize(n_users);
  reader.read_i64(snap.model.user_counts.data(), snap.model.user_counts.size());
  snap.model.cluster_counts.resize(n_users, n_clusters);
  reader.read_i64(snap.model.cluster_counts.data(), snap.model.cluster_counts.size());
  if (n_clusters > 0) {
    std::vector<std::int64_t> assignment(static_cast<std::size_t>(n_items));
    reader.read_i64(assignment.data(), assignment.size());
    snap.model.clusters.assignment.assign(assignment.begin(), assignment.end());
    for (int c : snap.model.clusters.assignment)
      if (c < 0 || c >= n_clusters)
        throw IntegrityError("snapshot cluster assignment is out of range");
  }
  snap.user_ids.resize(static_cast<std::size_t>(n_users));
  reader.read_i64(snap.user_ids.data(), snap.user_ids.size());
  snap.item_ids.resize(static_cast<std::size_t>(n_items));
  reader.read_i64(snap.item_ids.data(), snap.item_ids.size());
  if (reader.pos != reader.end)
    throw IntegrityError("snapshot payload is longer than its header declares");
  return snap;
}

double snapshot_predict(const Snapshot& snap, int u, int i) {
  switch (snap.kind) {
    case ModelKind::basic:
      return predict_basic(snap.model.factors, u, i);
    case ModelKind::biased:
      return predict_biased(snap.model.factors, snap.model.biases, u, i);
    case ModelKind::cbmf:
      return predict_cbmf(snap.model, u, i);
  }
  throw Error("unreachable model kind");
}

}  // namespace cbmf
