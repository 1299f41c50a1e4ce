#include <nlohmann/json.hpp>

#include "http_client.hpp"
#include "scenerag/errors.hpp"
#include "scenerag/rag.hpp"

namespace scenerag::rag {

RemoteChatBackend::RemoteChatBackend(ChatConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.endpoint_url.empty()) throw ConfigError("remote backend needs an endpoint URL");
  if (cfg_.model.empty()) throw ConfigError("remote backend needs a model name");
  http::parse_url(cfg_.endpoint_url);
}

std::pair<std::string, std::optional<Usage>> RemoteChatBackend::complete(const StructuredPrompt& prompt) const {
  const nlohmann::json request = {
      {"model", cfg_.model},
      {"temperature", cfg_.temperature},
      {"messages",
       {{{"role", "system"}, {"content", prompt.system}}, {{"role", "user"}, {"content", render_user_message(prompt)}}}}};
  const std::string raw = http::post_json(cfg_.endpoint_url, request.dump(), cfg_.http);

  nlohmann::json response;
  try {
    response = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string("chat response is not JSON: ") + e.what());
  }
  std::string answer;
  try {
    const auto& content = response.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw ProtocolError("chat response content is not a string");
    answer = content.get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("chat response lacks choices[0].message.content");
  }

  std::optional<Usage> usage;
  if (auto it = response.find("usage"); it != response.end() && it->is_object()) {
    Usage u;
    u.prompt_tokens = it->value("prompt_tokens", 0LL);
    u.completion_tokens = it->value("completion_tokens", 0LL);
    u.total_tokens = it->value("total_tokens", u.prompt_tokens + u.completion_tokens);
    usage = u;
  }
  return {std::move(answer), usage};
}

}  // namespace scenerag::rag
