#include "scenerag/rag.hpp"

#include <cstdio>

#include "scenerag/errors.hpp"

namespace scenerag::assets {
extern const std::string_view kTemplateWirelessV1;
}

namespace scenerag::rag {
namespace {

std::string_view trim_trailing_newlines(std::string_view s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string format_score(double score) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", score);
  return buf;
}

std::string source_label(const store::SearchHit& hit) {
  auto it = hit.metadata.find("source");
  if (it == hit.metadata.end()) return hit.id;
  return it->second + " " + hit.id;
}

}  // namespace

std::string build_query_text(const std::optional<std::string>& scene_body, std::string_view question) {
  if (question.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw ConfigError("question must not be empty");
  }
  if (!scene_body || scene_body->empty()) return std::string(question);
  std::string out(trim_trailing_newlines(*scene_body));
  out += "\n\n";
  out += question;
  return out;
}

std::vector<RankedHit> retrieve_context(const store::Collection& coll, const embedding::Embedder& embedder,
                                        std::string_view query_text, std::size_t k, store::SearchMode mode) {
  if (coll.manifest().provider != embedder.provider_tag()) {
    throw ConfigError("collection '" + coll.manifest().name + "' was built with embedder '" +
                      coll.manifest().provider + "' but the query embedder is '" + embedder.provider_tag() + "'");
  }
  if (k == 0) throw ConfigError("top-k must be at least 1");
  const auto query = embedder.embed_one(query_text);
  auto hits = coll.search(query, k, mode);
  std::vector<RankedHit> ranked;
  ranked.reserve(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) ranked.push_back({i + 1, std::move(hits[i])});
  return ranked;
}

std::string_view template_text(std::string_view template_id) {
  if (template_id == "wireless-v1") return assets::kTemplateWirelessV1;
  throw ConfigError("unknown prompt template '" + std::string(template_id) + "'");
}

std::vector<std::string> template_ids() { return {"wireless-v1"}; }

StructuredPrompt compose_prompt(const std::optional<std::string>& scene_body, std::vector<RankedHit> hits,
                                std::string_view question, std::string_view template_id) {
  if (question.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw ConfigError("question must not be empty");
  }
  StructuredPrompt p;
  p.template_id = std::string(template_id);
  p.system = std::string(trim_trailing_newlines(template_text(template_id)));
  if (scene_body) p.scene_context = std::string(trim_trailing_newlines(*scene_body));
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i].rank != i + 1) throw ConfigError("retrieved hits must be ranked 1..k in order");
    if (i > 0 && hits[i].hit.score > hits[i - 1].hit.score) {
      throw ConfigError("retrieved hits must have non-increasing scores");
    }
  }
  p.retrieved = std::move(hits);
  p.question = std::string(question);
  return p;
}

std::string render_user_message(const StructuredPrompt& p) {
  std::string out;
  out += "### Scene\n";
  out += p.scene_context.empty() ? std::string(kNoSceneSentinel) : p.scene_context;
  out += "\n\n### Retrieved context\n";
  if (p.retrieved.empty()) {
    out += kNoContextSentinel;
    out += "\n";
  } else {
    for (const auto& r : p.retrieved) {
      out += "[" + std::to_string(r.rank) + "] (" + format_score(r.hit.score) + ") ";
      out += trim_trailing_newlines(r.hit.text);
      out += " — " + source_label(r.hit) + "\n";
    }
  }
  out += "\n### Question\n";
  out += p.question;
  out += "\n";
  return out;
}

std::string serialize_prompt(const StructuredPrompt& p) {
  return "### System\n" + p.system + "\n\n" + render_user_message(p);
}

std::pair<std::string, std::optional<Usage>> EchoStubBackend::complete(const StructuredPrompt& prompt) const {
  if (prompt.retrieved.empty()) return {std::string(), std::nullopt};
  return {prompt.retrieved.front().hit.text, std::nullopt};
}

GenerationResult generate(const StructuredPrompt& prompt, const Backend& backend) {
  GenerationResult result;
  result.prompt_bytes = serialize_prompt(prompt);
  const auto start = std::chrono::steady_clock::now();
  auto [answer, usage] = backend.complete(prompt);
  const auto stop = std::chrono::steady_clock::now();
  result.answer = std::move(answer);
  result.usage = usage;
  result.latency_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return result;
}

}  // namespace scenerag::rag
