#include "scenerag/vector_store.hpp"

#include <algorithm>
#include <bit>
#include <cfloat>
#include <cmath>
#include <fstream>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "scenerag/errors.hpp"

namespace scenerag::store {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kVectorHeaderBytes = 4 + 4 + 4 + 8;
constexpr const char* kManifestFile = "manifest";
constexpr const char* kDocumentsFile = "documents";
constexpr const char* kVectorsFile = "vectors.bin";

struct DocEntry {
  std::string id;
  std::string text;
  Metadata metadata;
};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
std::uint64_t get_le(const std::string& in, std::size_t off, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
  return v;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomically(const fs::path& p, const std::string& bytes) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, p);
}

void validate_name(const std::string& name) {
  if (name.empty()) throw ConfigError("collection name must not be empty");
  if (name.front() == '.') throw ConfigError("collection name must not start with '.'");
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) throw ConfigError("collection name '" + name + "' may only use letters, digits, '-', '_' and '.'");
  }
}

bool ranks_before(double sa, std::size_t ia, double sb, std::size_t ib) {
  return sa > sb || (sa == sb && ia < ib);
}

}  // namespace

struct Collection::State {
  CollectionManifest manifest;
  std::vector<DocEntry> docs;
  std::vector<float> vectors;
  std::unordered_map<std::string, std::size_t> by_id;

  mutable std::shared_mutex mutex;
  mutable std::mutex index_mutex;
  mutable std::unique_ptr<index::HnswIndex> hnsw;

  std::span<const float> row(std::size_t i) const {
    return {vectors.data() + i * manifest.dim, manifest.dim};
  }

  SearchHit hit(std::size_t i, double score) const {
    return SearchHit{docs[i].id, score, docs[i].text, docs[i].metadata};
  }

  void check_query(const embedding::EmbeddingVector& q) const {
    if (q.dim() != manifest.dim) throw DimensionMismatchError(manifest.dim, q.dim());
  }

  const index::HnswIndex& ensure_index() const {
    std::lock_guard lock(index_mutex);
    if (!hnsw) {
      auto built = std::make_unique<index::HnswIndex>(manifest.dim, manifest.index_params);
      built->reserve(docs.size());
      for (std::size_t i = 0; i < docs.size(); ++i) built->add(row(i));
      hnsw = std::move(built);
    }
    return *hnsw;
  }
};

nlohmann::json to_json(const CollectionManifest& m) {
  return json{{"name", m.name},
              {"dim", m.dim},
              {"metric", m.metric},
              {"provider", m.provider},
              {"count", m.count},
              {"format_version", m.format_version},
              {"index_params",
               {{"M", m.index_params.m},
                {"ef_construction", m.index_params.ef_construction},
                {"ef_search", m.index_params.ef_search}}}};
}

CollectionManifest manifest_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("manifest: expected a JSON object");
  auto fv = j.find("format_version");
  if (fv == j.end() || !fv->is_number_integer()) throw FormatError("manifest: missing format_version");
  if (fv->get<long long>() != kFormatVersion) throw VersionMismatchError("manifest", fv->get<long long>(), kFormatVersion);
  CollectionManifest m;
  try {
    m.name = j.at("name").get<std::string>();
    m.dim = j.at("dim").get<std::size_t>();
    m.metric = j.at("metric").get<std::string>();
    m.provider = j.at("provider").get<std::string>();
    m.count = j.at("count").get<std::size_t>();
    const auto& p = j.at("index_params");
    m.index_params.m = p.at("M").get<std::size_t>();
    m.index_params.ef_construction = p.at("ef_construction").get<std::size_t>();
    m.index_params.ef_search = p.at("ef_search").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  if (m.metric != "cosine") throw FormatError("manifest: unsupported metric '" + m.metric + "'");
  if (m.dim == 0) throw FormatError("manifest: dim must be at least 1");
  return m;
}

SearchMode parse_search_mode(std::string_view s) {
  if (s == "exact") return SearchMode::kExact;
  if (s == "ann") return SearchMode::kAnn;
  throw ConfigError("unknown search mode '" + std::string(s) + "' (expected exact or ann)");
}

Collection::Collection(std::string name, std::size_t dim, std::string provider, index::HnswParams params)
    : state_(std::make_unique<State>()) {
  validate_name(name);
  if (dim == 0) throw ConfigError("collection dimension must be at least 1");
  if (params.m < 2 || params.ef_construction < 1 || params.ef_search < 1) {
    throw ConfigError("invalid HNSW parameters");
  }
  state_->manifest.name = std::move(name);
  state_->manifest.dim = dim;
  state_->manifest.provider = std::move(provider);
  state_->manifest.index_params = params;
}

Collection::~Collection() = default;
Collection::Collection(Collection&&) noexcept = default;
Collection& Collection::operator=(Collection&&) noexcept = default;

const CollectionManifest& Collection::manifest() const { return state_->manifest; }

std::size_t Collection::count() const {
  std::shared_lock lock(state_->mutex);
  return state_->docs.size();
}

std::size_t Collection::dim() const { return state_->manifest.dim; }

std::size_t Collection::add_documents(const std::vector<StoredDocument>& docs) {
  std::unique_lock lock(state_->mutex);
  State& s = *state_;

  std::unordered_set<std::string_view> batch_ids;
  for (const auto& d : docs) {
    if (d.id.empty()) throw ConfigError("document id must not be empty");
    if (s.by_id.count(d.id) || !batch_ids.insert(d.id).second) throw DuplicateIdError(d.id);
    if (d.vector.dim() != s.manifest.dim) throw DimensionMismatchError(s.manifest.dim, d.vector.dim());
    for (double v : d.vector.values()) {
      if (std::fabs(v) > FLT_MAX) throw ConfigError("vector for '" + d.id + "' does not fit in float32");
    }
  }

  const std::size_t first = s.docs.size();
  s.docs.reserve(first + docs.size());
  s.vectors.reserve((first + docs.size()) * s.manifest.dim);
  for (const auto& d : docs) {
    s.by_id.emplace(d.id, s.docs.size());
    s.docs.push_back({d.id, d.text, d.metadata});
    for (double v : d.vector.values()) s.vectors.push_back(static_cast<float>(v));
  }
  s.manifest.count = s.docs.size();

  std::lock_guard index_lock(s.index_mutex);
  if (s.hnsw) {
    for (std::size_t i = first; i < s.docs.size(); ++i) s.hnsw->add(s.row(i));
  }
  return docs.size();
}

std::optional<StoredDocument> Collection::get(const std::string& id) const {
  std::shared_lock lock(state_->mutex);
  auto it = state_->by_id.find(id);
  if (it == state_->by_id.end()) return std::nullopt;
  const auto& e = state_->docs[it->second];
  const auto row = state_->row(it->second);
  return StoredDocument{e.id, e.text, e.metadata,
                        embedding::EmbeddingVector(std::vector<double>(row.begin(), row.end()), embedding::Norm::kRaw)};
}

std::vector<std::string> Collection::ids() const {
  std::shared_lock lock(state_->mutex);
  std::vector<std::string> out;
  out.reserve(state_->docs.size());
  for (const auto& d : state_->docs) out.push_back(d.id);
  return out;
}

std::vector<SearchHit> Collection::search_exact(const embedding::EmbeddingVector& query, std::size_t k) const {
  std::shared_lock lock(state_->mutex);
  const State& s = *state_;
  s.check_query(query);
  if (k == 0) throw ConfigError("k must be at least 1");
  const std::size_t n = s.docs.size();
  if (n == 0) return {};

  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = embedding::cosine_similarity(query.values(), s.row(i));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const std::size_t top = std::min(k, n);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                    [&](std::size_t a, std::size_t b) { return ranks_before(scores[a], a, scores[b], b); });

  std::vector<SearchHit> hits;
  hits.reserve(top);
  for (std::size_t i = 0; i < top; ++i) hits.push_back(s.hit(order[i], scores[order[i]]));
  return hits;
}

std::vector<SearchHit> Collection::search_ann(const embedding::EmbeddingVector& query, std::size_t k) const {
  {
    std::shared_lock lock(state_->mutex);
    const State& s = *state_;
    s.check_query(query);
    if (k == 0) throw ConfigError("k must be at least 1");
    if (s.docs.empty()) return {};
  }
  auto hits = ann_candidates(query, k);
  // heavily duplicated vectors can leave graph nodes unreachable; never return
  // fewer hits than the collection can supply
  if (hits.size() < std::min(k, count())) return search_exact(query, k);
  return hits;
}

std::vector<SearchHit> Collection::ann_candidates(const embedding::EmbeddingVector& query, std::size_t k) const {
  std::shared_lock lock(state_->mutex);
  const State& s = *state_;
  const auto& hnsw = s.ensure_index();
  std::vector<float> q(query.values().begin(), query.values().end());
  const auto found = hnsw.search(q, std::max(k, s.manifest.index_params.ef_search), s.manifest.index_params.ef_search);

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(found.size());
  for (const auto& n : found) scored.emplace_back(embedding::cosine_similarity(query.values(), s.row(n.id)), n.id);
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return ranks_before(a.first, a.second, b.first, b.second); });
  if (scored.size() > k) scored.resize(k);

  std::vector<SearchHit> hits;
  hits.reserve(scored.size());
  for (const auto& [score, i] : scored) hits.push_back(s.hit(i, score));
  return hits;
}

std::vector<SearchHit> Collection::search(const embedding::EmbeddingVector& query, std::size_t k,
                                          SearchMode mode) const {
  return mode == SearchMode::kExact ? search_exact(query, k) : search_ann(query, k);
}

void Collection::persist(const fs::path& dir) const {
  std::shared_lock lock(state_->mutex);
  const State& s = *state_;
  fs::create_directories(dir);

  std::string docs;
  for (const auto& d : s.docs) {
    docs += json{{"id", d.id}, {"text", d.text}, {"metadata", d.metadata}}.dump();
    docs += '\n';
  }

  std::string vec;
  vec.reserve(kVectorHeaderBytes + s.vectors.size() * 4);
  vec.append(kVectorMagic, 4);
  put_u32(vec, static_cast<std::uint32_t>(kFormatVersion));
  put_u32(vec, static_cast<std::uint32_t>(s.manifest.dim));
  put_u64(vec, s.docs.size());
  for (float f : s.vectors) put_u32(vec, std::bit_cast<std::uint32_t>(f));

  write_file_atomically(dir / kDocumentsFile, docs);
  write_file_atomically(dir / kVectorsFile, vec);
  // manifest last: a directory with a manifest is a complete collection
  write_file_atomically(dir / kManifestFile, to_json(s.manifest).dump(2) + "\n");
}

Collection Collection::load(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestFile;
  if (!fs::exists(manifest_path)) throw Error("no collection at " + dir.string() + " (missing manifest)");

  json mj;
  try {
    mj = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  const CollectionManifest m = manifest_from_json(mj);

  const std::string vec = read_file(dir / kVectorsFile);
  if (vec.size() < kVectorHeaderBytes) {
    if (vec.size() >= 4 && vec.compare(0, 4, kVectorMagic, 4) != 0) throw FormatError("vectors.bin: bad magic bytes");
    throw IntegrityError("vectors.bin: truncated header (" + std::to_string(vec.size()) + " bytes)");
  }
  if (vec.compare(0, 4, kVectorMagic, 4) != 0) throw FormatError("vectors.bin: bad magic bytes");
  const auto version = static_cast<long long>(get_le(vec, 4, 4));
  if (version != kFormatVersion) throw VersionMismatchError("vectors.bin", version, kFormatVersion);
  const auto dim = get_le(vec, 8, 4);
  const auto count = get_le(vec, 12, 8);
  if (dim != m.dim) {
    throw IntegrityError("vectors.bin: dim " + std::to_string(dim) + " does not match manifest dim " + std::to_string(m.dim));
  }
  if (count != m.count) {
    throw IntegrityError("vectors.bin: count " + std::to_string(count) + " does not match manifest count " +
                         std::to_string(m.count));
  }
  const std::uint64_t expected_bytes = kVectorHeaderBytes + count * dim * 4;
  if (vec.size() != expected_bytes) {
    throw IntegrityError("vectors.bin: expected " + std::to_string(expected_bytes) + " bytes for " +
                         std::to_string(count) + " vectors, found " + std::to_string(vec.size()));
  }

  Collection c(m.name, m.dim, m.provider, m.index_params);
  State& s = *c.state_;
  s.vectors.resize(count * dim);
  for (std::size_t i = 0; i < s.vectors.size(); ++i) {
    s.vectors[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(vec, kVectorHeaderBytes + i * 4, 4)));
  }

  std::ifstream docs_in(dir / kDocumentsFile, std::ios::binary);
  if (!docs_in) throw Error("cannot open " + (dir / kDocumentsFile).string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(docs_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    DocEntry e;
    try {
      const json j = json::parse(line);
      e.id = j.at("id").get<std::string>();
      e.text = j.at("text").get<std::string>();
      e.metadata = j.at("metadata").get<Metadata>();
    } catch (const json::exception& ex) {
      throw FormatError("documents line " + std::to_string(line_no) + ": " + ex.what());
    }
    if (!s.by_id.emplace(e.id, s.docs.size()).second) throw IntegrityError("documents: duplicate id '" + e.id + "'");
    s.docs.push_back(std::move(e));
  }
  if (s.docs.size() != count) {
    throw IntegrityError("documents: " + std::to_string(s.docs.size()) + " records but manifest count is " +
                         std::to_string(count));
  }
  s.manifest.count = count;
  return c;
}

fs::path collection_path(const fs::path& db_root, const std::string& name) {
  validate_name(name);
  return db_root / name;
}

bool collection_exists(const fs::path& db_root, const std::string& name) {
  return fs::exists(collection_path(db_root, name) / kManifestFile);
}

Collection create_collection(const fs::path& db_root, const std::string& name, std::size_t dim,
                             const std::string& provider, index::HnswParams params) {
  const fs::path dir = collection_path(db_root, name);
  if (fs::exists(dir)) throw ConfigError("collection '" + name + "' already exists at " + dir.string());
  Collection c(name, dim, provider, params);
  c.persist(dir);
  return c;
}

Collection open_collection(const fs::path& db_root, const std::string& name) {
  return Collection::load(collection_path(db_root, name));
}

}  // namespace scenerag::store
