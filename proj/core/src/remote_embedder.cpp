#include <nlohmann/json.hpp>

#include "http_client.hpp"
#include "scenerag/embedding.hpp"
#include "scenerag/errors.hpp"

namespace scenerag::embedding {

std::vector<EmbeddingVector> embed_remote(std::span<const std::string> texts, const EmbedderConfig& cfg) {
  if (cfg.provider != Provider::kRemote) throw ConfigError("embed_remote requires the remote provider");
  if (texts.empty()) throw ConfigError("embedding batch must not be empty");
  validate(cfg);

  nlohmann::json request = {{"model", cfg.model_name}, {"input", texts}};
  const std::string raw = http::post_json(cfg.endpoint_url, request.dump(), cfg.http);

  nlohmann::json response;
  try {
    response = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string("embeddings response is not JSON: ") + e.what());
  }
  const auto data = response.find("data");
  if (data == response.end() || !data->is_array()) throw ProtocolError("embeddings response lacks a 'data' array");
  if (data->size() != texts.size()) {
    throw ProtocolError("embeddings response has " + std::to_string(data->size()) + " vectors for " +
                        std::to_string(texts.size()) + " inputs");
  }

  std::vector<std::optional<EmbeddingVector>> slots(texts.size());
  for (std::size_t pos = 0; pos < data->size(); ++pos) {
    const auto& item = (*data)[pos];
    if (!item.is_object()) throw ProtocolError("embeddings entry is not an object");
    std::size_t index = pos;
    if (auto it = item.find("index"); it != item.end()) {
      if (!it->is_number_unsigned()) throw ProtocolError("embeddings entry has a non-integer index");
      index = it->get<std::size_t>();
    }
    if (index >= slots.size() || slots[index]) {
      throw ProtocolError("embeddings entry index " + std::to_string(index) + " is out of range or repeated");
    }
    const auto emb = item.find("embedding");
    if (emb == item.end() || !emb->is_array()) throw ProtocolError("embeddings entry lacks an 'embedding' array");
    if (emb->size() != cfg.dim) throw DimensionMismatchError(cfg.dim, emb->size());
    std::vector<double> values;
    values.reserve(emb->size());
    for (const auto& v : *emb) {
      if (!v.is_number()) throw ProtocolError("embedding contains a non-numeric value");
      values.push_back(v.get<double>());
    }
    slots[index].emplace(std::move(values), Norm::kRaw);
  }

  std::vector<EmbeddingVector> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace scenerag::embedding
