#include "scenerag/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <map>

#include "scenerag/errors.hpp"

namespace scenerag::assets {
extern const std::string_view kStopListEnV1;
}

namespace scenerag::text {
namespace {

// Calls fn(begin, end) for each token's byte range.
template <typename Fn>
void for_each_token(std::string_view text, Fn&& fn) {
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  int32_t token_begin = -1;
  while (i < length) {
    const int32_t at = i;
    UChar32 c = 0;
    U8_NEXT(s, i, length, c);
    const bool word_char = c >= 0 && u_isalnum(c);
    if (word_char && token_begin < 0) {
      token_begin = at;
    } else if (!word_char && token_begin >= 0) {
      fn(static_cast<std::size_t>(token_begin), static_cast<std::size_t>(at));
      token_begin = -1;
    }
  }
  if (token_begin >= 0) fn(static_cast<std::size_t>(token_begin), text.size());
}

std::string fold(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  const auto* s = reinterpret_cast<const uint8_t*>(token.data());
  const auto length = static_cast<int32_t>(token.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(s, i, length, c);
    const UChar32 folded = u_foldCase(c, U_FOLD_CASE_DEFAULT);
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    U8_APPEND_UNSAFE(buf, n, folded);
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return out;
}

}  // namespace

TokenStream tokenize(std::string_view text) {
  TokenStream ts;
  for_each_token(text, [&](std::size_t b, std::size_t e) { ts.tokens.push_back(fold(text.substr(b, e - b))); });
  return ts;
}

std::vector<TokenSpan> token_spans(std::string_view text) {
  std::vector<TokenSpan> spans;
  for_each_token(text, [&](std::size_t b, std::size_t e) { spans.push_back({b, e}); });
  return spans;
}

StopList StopList::parse(std::string id, std::string_view contents) {
  StopList list;
  list.id_ = std::move(id);
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    auto nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = contents.substr(pos, nl - pos);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (!line.empty() && line.front() != '#') {
      // store in the same normal form the tokenizer emits
      for (auto& t : tokenize(line).tokens) list.words_.insert(std::move(t));
    }
    pos = nl + 1;
  }
  return list;
}

const StopList& StopList::builtin(std::string_view id) {
  static const std::map<std::string, StopList, std::less<>> lists = [] {
    std::map<std::string, StopList, std::less<>> m;
    m.emplace("en-v1", StopList::parse("en-v1", assets::kStopListEnV1));
    m.emplace("none", StopList::parse("none", ""));
    return m;
  }();
  auto it = lists.find(id);
  if (it == lists.end()) {
    throw ConfigError("unknown stop list '" + std::string(id) + "'");
  }
  return it->second;
}

std::vector<std::string> StopList::builtin_ids() { return {"en-v1", "none"}; }

bool StopList::contains(std::string_view token) const { return words_.count(std::string(token)) > 0; }

TokenStream remove_stopwords(const TokenStream& ts, const StopList& list) {
  TokenStream out;
  out.tokens.reserve(ts.tokens.size());
  for (const auto& t : ts.tokens) {
    if (!list.contains(t)) out.tokens.push_back(t);
  }
  return out;
}

TokenStream remove_stopwords(const TokenStream& ts, std::string_view list_id) {
  return remove_stopwords(ts, StopList::builtin(list_id));
}

std::vector<Chunk> chunk_text(std::string_view doc_id, std::string_view text, std::size_t chunk_size,
                              std::size_t overlap) {
  if (chunk_size == 0) throw ConfigError("chunk_size must be at least 1");
  if (overlap >= chunk_size) {
    throw ConfigError("overlap (" + std::to_string(overlap) + ") must be smaller than chunk_size (" +
                      std::to_string(chunk_size) + ")");
  }
  const auto spans = token_spans(text);
  std::vector<Chunk> chunks;
  if (spans.empty()) return chunks;

  const std::size_t stride = chunk_size - overlap;
  const std::size_t n = spans.size();
  for (std::size_t start = 0;; start += stride) {
    const std::size_t end = std::min(start + chunk_size, n);
    Chunk c;
    c.doc_id = std::string(doc_id);
    c.chunk_index = chunks.size();
    c.text = std::string(text.substr(spans[start].begin, spans[end - 1].end - spans[start].begin));
    c.token_count = end - start;
    c.token_begin = start;
    c.token_end = end;
    chunks.push_back(std::move(c));
    if (end == n) break;
  }
  return chunks;
}

bool looks_like_text(std::string_view bytes) {
  const auto* s = reinterpret_cast<const uint8_t*>(bytes.data());
  const auto length = static_cast<int32_t>(bytes.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(s, i, length, c);
    if (c < 0) return false;
    if (c < 0x20 && c != '\t' && c != '\n' && c != '\r' && c != '\f') return false;
  }
  return true;
}

}  // namespace scenerag::text
