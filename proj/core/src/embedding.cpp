#include "scenerag/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "scenerag/errors.hpp"

namespace scenerag::embedding {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
constexpr std::uint64_t kHashSeed = 0x5ce9e7a6b1d3c2f1ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <typename T>
double cosine_impl(std::span<const double> a, std::span<const T> b) {
  if (a.size() != b.size()) throw DimensionMismatchError(a.size(), b.size());
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double y = static_cast<double>(b[i]);
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  // sqrt(na*nb) rather than sqrt(na)*sqrt(nb): exact 1.0 for identical operands
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

EmbeddingVector onehot_counts(const text::TokenStream& tokens, std::span<const std::string> vocabulary,
                              const std::unordered_map<std::string_view, std::size_t>& index) {
  std::vector<double> counts(vocabulary.size(), 0.0);
  for (const auto& t : tokens.tokens) {
    auto it = index.find(t);
    if (it != index.end()) counts[it->second] += 1.0;
  }
  return EmbeddingVector(std::move(counts), Norm::kRaw);
}

std::unordered_map<std::string_view, std::size_t> vocabulary_index(std::span<const std::string> vocabulary) {
  if (vocabulary.empty()) throw ConfigError("one-hot vocabulary must not be empty");
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(vocabulary.size());
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    if (!index.emplace(vocabulary[i], i).second) {
      throw ConfigError("one-hot vocabulary repeats '" + vocabulary[i] + "'");
    }
  }
  return index;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class LocalHashEmbedder final : public Embedder {
 public:
  LocalHashEmbedder(std::size_t dim, const text::StopList& stop) : dim_(dim), stop_(stop) {}

  std::size_t dim() const override { return dim_; }
  std::string provider_tag() const override {
    return "local-hash:v1:dim=" + std::to_string(dim_) + ":stop=" + stop_.id();
  }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      out.push_back(embed_tokens_hashed(text::remove_stopwords(text::tokenize(t), stop_), dim_));
    }
    return out;
  }

 private:
  std::size_t dim_;
  const text::StopList& stop_;
};

class OneHotEmbedder final : public Embedder {
 public:
  OneHotEmbedder(std::vector<std::string> vocabulary, const text::StopList& stop)
      : vocabulary_(std::move(vocabulary)), index_(vocabulary_index(vocabulary_)), stop_(stop) {}

  std::size_t dim() const override { return vocabulary_.size(); }
  std::string provider_tag() const override {
    std::uint64_t h = kFnvOffset;
    for (const auto& w : vocabulary_) h = mix64(h ^ token_hash(w));
    return "bow-onehot:v1:dim=" + std::to_string(vocabulary_.size()) + ":vocab=" + hex64(h) +
           ":stop=" + stop_.id();
  }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      out.push_back(onehot_counts(text::remove_stopwords(text::tokenize(t), stop_), vocabulary_, index_));
    }
    return out;
  }

 private:
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string_view, std::size_t> index_;
  const text::StopList& stop_;
};

class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(EmbedderConfig cfg) : cfg_(std::move(cfg)) {}

  std::size_t dim() const override { return cfg_.dim; }
  std::string provider_tag() const override {
    return "remote:model=" + cfg_.model_name + ":dim=" + std::to_string(cfg_.dim);
  }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override {
    if (texts.empty()) return {};
    return embed_remote(texts, cfg_);
  }

 private:
  EmbedderConfig cfg_;
};

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values, Norm norm) : values_(std::move(values)), norm_(norm) {
  if (values_.empty()) throw ConfigError("embedding dimension must be at least 1");
  for (double v : values_) {
    if (!std::isfinite(v)) throw ConfigError("embedding contains a non-finite value");
  }
}

EmbeddingVector EmbeddingVector::zeros(std::size_t dim, Norm norm) {
  return EmbeddingVector(std::vector<double>(dim, 0.0), norm);
}

double EmbeddingVector::l2_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  return cosine_impl<double>(a.values(), b.values());
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) { return cosine_impl<double>(a, b); }

double cosine_similarity(std::span<const double> a, std::span<const float> b) { return cosine_impl<float>(a, b); }

std::uint64_t token_hash(std::string_view token) {
  std::uint64_t h = kFnvOffset ^ kHashSeed;
  for (unsigned char c : token) {
    h ^= c;
    h *= kFnvPrime;
  }
  return mix64(h);
}

EmbeddingVector embed_tokens_hashed(const text::TokenStream& tokens, std::size_t dim) {
  if (dim == 0) throw ConfigError("embedding dimension must be at least 1");
  std::vector<double> acc(dim, 0.0);
  for (const auto& t : tokens.tokens) {
    const std::uint64_t h = token_hash(t);
    // low bits pick the bucket, the top bit picks the sign
    const std::size_t bucket = static_cast<std::size_t>(h % dim);
    acc[bucket] += (h >> 63) ? -1.0 : 1.0;
  }
  double sq = 0.0;
  for (double v : acc) sq += v * v;
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : acc) v *= inv;
  }
  return EmbeddingVector(std::move(acc), Norm::kUnitL2);
}

EmbeddingVector embed_local(std::string_view text, std::size_t dim) {
  return embed_tokens_hashed(text::tokenize(text), dim);
}

EmbeddingVector embed_onehot(std::string_view text, std::span<const std::string> vocabulary) {
  const auto index = vocabulary_index(vocabulary);
  return onehot_counts(text::tokenize(text), vocabulary, index);
}

std::string_view provider_name(Provider p) {
  switch (p) {
    case Provider::kLocalHash:
      return "local-hash";
    case Provider::kBowOneHot:
      return "bow-onehot";
    case Provider::kRemote:
      return "remote";
  }
  return "unknown";
}

Provider parse_provider(std::string_view name) {
  if (name == "local" || name == "local-hash") return Provider::kLocalHash;
  if (name == "onehot" || name == "bow-onehot") return Provider::kBowOneHot;
  if (name == "remote") return Provider::kRemote;
  throw ConfigError("unknown embedding provider '" + std::string(name) + "'");
}

void validate(const EmbedderConfig& cfg) {
  const bool remote = cfg.provider == Provider::kRemote;
  if (cfg.provider == Provider::kBowOneHot) {
    if (cfg.vocabulary.empty()) throw ConfigError("bow-onehot provider needs a vocabulary");
  } else if (cfg.dim < 1) {
    throw ConfigError("embedding dimension must be at least 1");
  }
  if (remote) {
    if (cfg.endpoint_url.empty()) throw ConfigError("remote provider needs an endpoint URL");
    if (cfg.model_name.empty()) throw ConfigError("remote provider needs a model name");
    if (cfg.http.retry.max_attempts < 1) throw ConfigError("retry attempts must be at least 1");
  } else if (!cfg.endpoint_url.empty() || !cfg.model_name.empty()) {
    throw ConfigError("endpoint URL and model name only apply to the remote provider");
  }
  if (!remote) text::StopList::builtin(cfg.stop_list);
}

EmbeddingVector Embedder::embed_one(std::string_view text) const {
  const std::string s(text);
  auto v = embed(std::span<const std::string>(&s, 1));
  return std::move(v.at(0));
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& cfg) {
  validate(cfg);
  switch (cfg.provider) {
    case Provider::kLocalHash:
      return std::make_unique<LocalHashEmbedder>(cfg.dim, text::StopList::builtin(cfg.stop_list));
    case Provider::kBowOneHot:
      return std::make_unique<OneHotEmbedder>(cfg.vocabulary, text::StopList::builtin(cfg.stop_list));
    case Provider::kRemote:
      return std::make_unique<RemoteEmbedder>(cfg);
  }
  throw ConfigError("unknown embedding provider");
}

}  // namespace scenerag::embedding
