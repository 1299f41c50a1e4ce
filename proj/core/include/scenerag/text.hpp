#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace scenerag::text {

inline constexpr std::size_t kDefaultChunkSize = 256;
inline constexpr std::size_t kDefaultChunkOverlap = 32;
inline constexpr std::string_view kDefaultStopList = "en-v1";

/// Lowercase (case-folded) tokens in document order.
struct TokenStream {
  std::vector<std::string> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  friend bool operator==(const TokenStream&, const TokenStream&) = default;
};

/// Byte range [begin, end) of one token in the source text.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Splits on every maximal run of characters that are neither Unicode letters nor
/// digits and applies simple case folding. Invalid UTF-8 bytes act as separators.
TokenStream tokenize(std::string_view text);

/// Byte spans of the tokens `tokenize` would produce, without materialising them.
std::vector<TokenSpan> token_spans(std::string_view text);

class StopList {
 public:
  /// Built-in, versioned list. Throws ConfigError for an unknown id.
  static const StopList& builtin(std::string_view id);
  /// One word per line; blank lines and lines starting with '#' are skipped.
  static StopList parse(std::string id, std::string_view contents);

  /// Ids accepted by `builtin`.
  static std::vector<std::string> builtin_ids();

  const std::string& id() const noexcept { return id_; }
  bool contains(std::string_view token) const;
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::string id_;
  std::unordered_set<std::string> words_;
};

TokenStream remove_stopwords(const TokenStream& ts, const StopList& list);
/// Looks `list_id` up among the built-in lists.
TokenStream remove_stopwords(const TokenStream& ts, std::string_view list_id);

struct Chunk {
  std::string doc_id;
  std::size_t chunk_index = 0;
  std::string text;  // slice of the original, un-normalised text
  std::size_t token_count = 0;
  std::size_t token_begin = 0;  // token range [token_begin, token_end) in the document
  std::size_t token_end = 0;

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

/// Sliding window over the token stream with stride chunk_size - overlap. The final
/// partial window is kept. Throws ConfigError unless 0 <= overlap < chunk_size.
std::vector<Chunk> chunk_text(std::string_view doc_id, std::string_view text,
                              std::size_t chunk_size = kDefaultChunkSize,
                              std::size_t overlap = kDefaultChunkOverlap);

/// True for valid UTF-8 without NUL or other C0 control bytes except tab/CR/LF.
bool looks_like_text(std::string_view bytes);

}  // namespace scenerag::text
