#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scenerag/embedding.hpp"
#include "scenerag/hnsw.hpp"

namespace scenerag::store {

inline constexpr int kFormatVersion = 1;
inline constexpr char kVectorMagic[4] = {'S', 'R', 'V', 'C'};

using Metadata = std::map<std::string, std::string>;

struct StoredDocument {
  std::string id;
  std::string text;
  Metadata metadata;
  embedding::EmbeddingVector vector;
};

struct CollectionManifest {
  std::string name;
  std::size_t dim = 0;
  std::string metric = "cosine";
  std::string provider;
  std::size_t count = 0;
  int format_version = kFormatVersion;
  index::HnswParams index_params;
};

nlohmann::json to_json(const CollectionManifest& m);
/// Throws FormatError / VersionMismatchError on malformed input.
CollectionManifest manifest_from_json(const nlohmann::json& j);

struct SearchHit {
  std::string id;
  double score = 0.0;
  std::string text;
  Metadata metadata;
};

enum class SearchMode { kExact, kAnn };
SearchMode parse_search_mode(std::string_view s);

/// Named set of documents with their vectors. Many concurrent readers or one
/// writer: searches take a shared lock, add_documents an exclusive one. The HNSW
/// graph is built lazily on the first approximate search and kept in sync afterwards.
class Collection {
 public:
  /// In-memory collection. Throws ConfigError for an empty name or dim 0.
  Collection(std::string name, std::size_t dim, std::string provider = "unspecified",
             index::HnswParams params = {});
  ~Collection();
  Collection(Collection&&) noexcept;
  Collection& operator=(Collection&&) noexcept;

  const CollectionManifest& manifest() const;
  std::size_t count() const;
  std::size_t dim() const;

  /// All-or-nothing. Throws DuplicateIdError (within the batch or against stored
  /// ids) or DimensionMismatchError; nothing is added in that case.
  std::size_t add_documents(const std::vector<StoredDocument>& docs);

  std::optional<StoredDocument> get(const std::string& id) const;
  /// Ids in insertion order.
  std::vector<std::string> ids() const;

  /// Top-k by cosine similarity; ties go to the earlier-inserted document.
  std::vector<SearchHit> search_exact(const embedding::EmbeddingVector& query, std::size_t k) const;
  /// Approximate top-k through the HNSW graph, re-scored with the same cosine op.
  std::vector<SearchHit> search_ann(const embedding::EmbeddingVector& query, std::size_t k) const;
  std::vector<SearchHit> search(const embedding::EmbeddingVector& query, std::size_t k, SearchMode mode) const;

  /// Writes manifest, documents and vectors.bin into `dir` (created if needed).
  /// Each file is written to a temporary name and renamed into place.
  void persist(const std::filesystem::path& dir) const;
  static Collection load(const std::filesystem::path& dir);

 private:
  std::vector<SearchHit> ann_candidates(const embedding::EmbeddingVector& query, std::size_t k) const;

  struct State;
  std::unique_ptr<State> state_;
};

/// Collections on disk live in <db_root>/<name>/.
std::filesystem::path collection_path(const std::filesystem::path& db_root, const std::string& name);

/// Creates an empty collection and writes it to disk. Throws ConfigError if the
/// target directory already exists.
Collection create_collection(const std::filesystem::path& db_root, const std::string& name, std::size_t dim,
                             const std::string& provider, index::HnswParams params = {});
Collection open_collection(const std::filesystem::path& db_root, const std::string& name);
bool collection_exists(const std::filesystem::path& db_root, const std::string& name);

}  // namespace scenerag::store
