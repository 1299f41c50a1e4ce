#include "scenerag/errors.hpp"

#include <utility>

namespace scenerag {

ValidationError::ValidationError(std::size_t line, std::string field, const std::string& reason)
    : Error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + "field '" + field +
            "': " + reason),
      line_(line),
      field_(std::move(field)) {}

DuplicateIdError::DuplicateIdError(std::string id)
    : Error("duplicate id '" + id + "'"), id_(std::move(id)) {}

DimensionMismatchError::DimensionMismatchError(std::size_t expected, std::size_t actual)
    : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
            std::to_string(actual)),
      expected_(expected),
      actual_(actual) {}

VersionMismatchError::VersionMismatchError(std::string what_file, long long found, long long expected)
    : FormatError(what_file + ": unsupported format_version " + std::to_string(found) + " (expected " +
                  std::to_string(expected) + ")"),
      found_(found),
      expected_(expected) {}

HttpStatusError::HttpStatusError(int status, std::string body_excerpt)
    : Error("HTTP status " + std::to_string(status) + ": " + body_excerpt),
      status_(status),
      body_excerpt_(std::move(body_excerpt)) {}

}  // namespace scenerag
