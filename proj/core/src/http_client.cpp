#include "http_client.hpp"

#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "scenerag/errors.hpp"

namespace scenerag::http {
namespace {

constexpr std::size_t kBodyExcerptBytes = 256;

std::string excerpt(const std::string& body) {
  if (body.size() <= kBodyExcerptBytes) return body;
  return body.substr(0, kBodyExcerptBytes) + "...";
}

}  // namespace

Url parse_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw ConfigError("URL must be absolute: '" + std::string(url) + "'");
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported URL scheme '" + std::string(scheme) + "'");
  }
  const auto host_begin = scheme_end + 3;
  const auto path_begin = url.find('/', host_begin);
  Url out;
  if (path_begin == std::string_view::npos) {
    out.origin = std::string(url);
    out.path = "/";
  } else {
    out.origin = std::string(url.substr(0, path_begin));
    out.path = std::string(url.substr(path_begin));
  }
  if (out.origin.size() == host_begin) throw ConfigError("URL has no host: '" + std::string(url) + "'");
  return out;
}

std::string resolve_bearer_token(const HttpOptions& options) {
  if (!options.bearer_token.empty()) return options.bearer_token;
  if (const char* env = std::getenv(kApiKeyEnvVar)) return env;
  return {};
}

std::string post_json(std::string_view url, const std::string& body, const HttpOptions& options) {
  const Url target = parse_url(url);
  httplib::Client client(target.origin);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());

  httplib::Headers headers;
  if (auto token = resolve_bearer_token(options); !token.empty()) {
    headers.emplace("Authorization", "Bearer " + token);
  }

  const int attempts = std::max(1, options.retry.max_attempts);
  auto delay = options.retry.initial_delay;
  std::string last_error;
  int last_status = 0;
  std::string last_body;

  for (int attempt = 1; attempt <= attempts; ++attempt) {
    auto res = client.Post(target.path, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      last_status = 0;
    } else if (res->status >= 200 && res->status < 300) {
      return res->body;
    } else if (res->status >= 500) {
      last_status = res->status;
      last_body = res->body;
    } else {
      throw HttpStatusError(res->status, excerpt(res->body));
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(delay);
      delay = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(delay.count()) * options.retry.backoff_factor));
    }
  }
  if (last_status != 0) throw HttpStatusError(last_status, excerpt(last_body));
  throw TransportError("POST " + std::string(url) + " failed after " + std::to_string(attempts) +
                       " attempts: " + last_error);
}

}  // namespace scenerag::http
