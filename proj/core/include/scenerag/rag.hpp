#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scenerag/embedding.hpp"
#include "scenerag/http.hpp"
#include "scenerag/vector_store.hpp"

namespace scenerag::rag {

inline constexpr std::size_t kDefaultTopK = 4;
inline constexpr std::string_view kDefaultTemplate = "wireless-v1";
inline constexpr std::string_view kNoContextSentinel = "no retrieved context";
inline constexpr std::string_view kNoSceneSentinel = "no scene context";

struct RankedHit {
  std::size_t rank = 0;  // 1-based
  store::SearchHit hit;
};

struct StructuredPrompt {
  std::string template_id;
  std::string system;
  std::string scene_context;  // empty when no scene was supplied
  std::vector<RankedHit> retrieved;
  std::string question;
};

/// Scene body, one blank line, then the question. Throws ConfigError for an empty question.
std::string build_query_text(const std::optional<std::string>& scene_body, std::string_view question);

/// Embeds the query and runs the chosen search. Throws ConfigError when the
/// collection was built by a different embedder than `embedder`.
std::vector<RankedHit> retrieve_context(const store::Collection& coll, const embedding::Embedder& embedder,
                                        std::string_view query_text, std::size_t k = kDefaultTopK,
                                        store::SearchMode mode = store::SearchMode::kExact);

/// System text of a built-in template. Throws ConfigError for an unknown id.
std::string_view template_text(std::string_view template_id);
std::vector<std::string> template_ids();

StructuredPrompt compose_prompt(const std::optional<std::string>& scene_body, std::vector<RankedHit> hits,
                                std::string_view question, std::string_view template_id = kDefaultTemplate);

/// User-facing half of the prompt: scene, retrieved context, question.
std::string render_user_message(const StructuredPrompt& p);
/// Exact bytes of the whole prompt (system + user sections).
std::string serialize_prompt(const StructuredPrompt& p);

struct Usage {
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
  long long total_tokens = 0;
};

struct GenerationResult {
  std::string answer;
  std::string prompt_bytes;
  std::optional<Usage> usage;
  double latency_ms = 0.0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  /// Returns the answer text and, when the backend reports it, token usage.
  virtual std::pair<std::string, std::optional<Usage>> complete(const StructuredPrompt& prompt) const = 0;
};

/// Answers with the rank-1 retrieved chunk verbatim, or "" when nothing was retrieved.
class EchoStubBackend final : public Backend {
 public:
  std::string name() const override { return "echo"; }
  std::pair<std::string, std::optional<Usage>> complete(const StructuredPrompt& prompt) const override;
};

/// Answers with a constant regardless of the prompt; the no-retrieval baseline.
class FixedStubBackend final : public Backend {
 public:
  explicit FixedStubBackend(std::string answer) : answer_(std::move(answer)) {}
  std::string name() const override { return "fixed"; }
  std::pair<std::string, std::optional<Usage>> complete(const StructuredPrompt&) const override {
    return {answer_, std::nullopt};
  }

 private:
  std::string answer_;
};

struct ChatConfig {
  std::string endpoint_url;
  std::string model;
  double temperature = 0.0;
  HttpOptions http;
};

/// Chat-completions wire shape: system + user messages in, choices[0].message.content out.
class RemoteChatBackend final : public Backend {
 public:
  explicit RemoteChatBackend(ChatConfig cfg);
  std::string name() const override { return "remote"; }
  std::pair<std::string, std::optional<Usage>> complete(const StructuredPrompt& prompt) const override;

 private:
  ChatConfig cfg_;
};

/// Runs the backend and records wall-clock latency.
GenerationResult generate(const StructuredPrompt& prompt, const Backend& backend);

}  // namespace scenerag::rag
