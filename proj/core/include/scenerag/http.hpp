#pragma once

#include <chrono>
#include <string>

namespace scenerag {

/// Bounded exponential backoff for remote calls. Connection failures, timeouts and
/// 5xx responses are retried; other non-2xx responses fail immediately.
struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_delay{200};
  double backoff_factor = 2.0;
};

struct HttpOptions {
  RetryPolicy retry;
  std::chrono::milliseconds timeout{30000};
  std::string bearer_token;  // sent as "Authorization: Bearer ..." when non-empty
};

/// Environment variable holding the bearer token for remote endpoints.
inline constexpr const char* kApiKeyEnvVar = "SCENE_RAG_API_KEY";

}  // namespace scenerag
