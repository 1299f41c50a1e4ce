#pragma once

#include <string>
#include <string_view>

#include "scenerag/http.hpp"

namespace scenerag::http {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

/// Splits an absolute http(s) URL. Throws ConfigError when malformed.
Url parse_url(std::string_view url);

/// POSTs a JSON body and returns the body of the 2xx response. Retries per
/// options.retry; throws TransportError or HttpStatusError when attempts run out.
std::string post_json(std::string_view url, const std::string& body, const HttpOptions& options);

/// Token from options, else from the SCENE_RAG_API_KEY environment variable.
std::string resolve_bearer_token(const HttpOptions& options);

}  // namespace scenerag::http
