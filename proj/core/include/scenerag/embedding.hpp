#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scenerag/http.hpp"
#include "scenerag/text.hpp"

namespace scenerag::embedding {

inline constexpr std::size_t kDefaultDim = 384;

enum class Norm { kUnitL2, kRaw };

class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  /// Throws ConfigError for an empty or non-finite vector.
  EmbeddingVector(std::vector<double> values, Norm norm);

  static EmbeddingVector zeros(std::size_t dim, Norm norm);

  std::size_t dim() const noexcept { return values_.size(); }
  Norm norm() const noexcept { return norm_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double l2_norm() const;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
  Norm norm_ = Norm::kRaw;
};

/// a·b / (‖a‖‖b‖), clamped to [-1, 1]. A zero operand yields 0.0.
/// Throws DimensionMismatchError when the lengths differ.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);
double cosine_similarity(std::span<const double> a, std::span<const double> b);
/// Mixed-precision form used against stored float32 rows; identical arithmetic
/// to the double form once the row is widened.
double cosine_similarity(std::span<const double> a, std::span<const float> b);

/// Deterministic 64-bit hash of a token; stable across platforms and runs.
std::uint64_t token_hash(std::string_view token);

/// Signed feature hashing of the token stream into `dim` buckets, L2-normalised.
/// An empty stream gives the zero vector.
EmbeddingVector embed_tokens_hashed(const text::TokenStream& tokens, std::size_t dim);
EmbeddingVector embed_local(std::string_view text, std::size_t dim = kDefaultDim);

/// Term-frequency vector over `vocabulary` (one-hot for a single in-vocabulary token).
/// Throws ConfigError for an empty vocabulary or repeated entries.
EmbeddingVector embed_onehot(std::string_view text, std::span<const std::string> vocabulary);

enum class Provider { kLocalHash, kBowOneHot, kRemote };

std::string_view provider_name(Provider p);
/// Accepts "local", "local-hash", "onehot", "bow-onehot", "remote".
Provider parse_provider(std::string_view name);

struct EmbedderConfig {
  Provider provider = Provider::kLocalHash;
  std::size_t dim = kDefaultDim;
  /// Stop list applied before hashing/counting (local providers only). "none" disables.
  std::string stop_list = std::string(text::kDefaultStopList);
  std::vector<std::string> vocabulary;  // bow-onehot only; dim follows its size
  std::string endpoint_url;             // remote only
  std::string model_name;               // remote only
  HttpOptions http;                     // remote only; bearer token from here or the env var
};

/// Throws ConfigError when fields contradict the provider.
void validate(const EmbedderConfig& cfg);

class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::size_t dim() const = 0;
  /// Provenance recorded in a collection manifest. Collections only accept
  /// queries from an embedder with the same tag.
  virtual std::string provider_tag() const = 0;
  /// One vector per input, in input order.
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const = 0;

  EmbeddingVector embed_one(std::string_view text) const;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& cfg);

/// Batch call against an embeddings endpoint: POST {"model","input"} and reassemble
/// {"data":[{"index","embedding"}]} by index. Checks cardinality and dimension.
std::vector<EmbeddingVector> embed_remote(std::span<const std::string> texts, const EmbedderConfig& cfg);

}  // namespace scenerag::embedding
