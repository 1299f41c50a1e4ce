#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scenerag/geo.hpp"
#include "scenerag/http.hpp"

namespace scenerag::scene {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kPowerArrays = 4;
inline constexpr std::size_t kBeamsPerArray = 64;

struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Detection {
  std::string class_name;
  double confidence = 0.0;
  std::optional<BoundingBox> bbox;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Received power per phased array (rows) and beam (columns).
using PowerMatrix = std::array<std::array<double, kBeamsPerArray>, kPowerArrays>;

struct SceneRecord {
  std::string scene_id;
  std::int64_t timestamp_us = 0;
  geo::GeoPoint gps_tx;
  geo::GeoPoint gps_rx;
  std::optional<std::string> camera_caption;
  std::optional<std::string> lidar_caption;
  std::vector<Detection> detections;
  std::optional<PowerMatrix> power;
  /// Reference to the source image, used only by caption annotation.
  std::optional<std::string> image_ref;

  friend bool operator==(const SceneRecord&, const SceneRecord&) = default;
};

/// Throws ValidationError naming the offending field.
void validate(const SceneRecord& rec, std::size_t line = 0);

/// One JSON object per line; blank lines are skipped. Validates every record and
/// rejects duplicate scene ids. Errors carry the 1-based line number.
std::vector<SceneRecord> parse_scene_records(std::istream& in);
std::vector<SceneRecord> parse_scene_records(std::string_view text);

/// Single-line JSON encoding accepted by parse_scene_records.
std::string serialize_scene_record(const SceneRecord& rec);

struct BeamIndex {
  std::size_t array_index = 0;
  std::size_t beam_index = 0;

  friend bool operator==(const BeamIndex&, const BeamIndex&) = default;
};

struct SceneText {
  std::string scene_id;
  std::string body;
  double distance_km = 0.0;
  double bearing_deg = 0.0;
  std::size_t vehicle_count = 0;
  std::optional<BeamIndex> best_beam;
};

struct SceneTextOptions {
  std::set<std::string> vehicle_classes{"bicycle", "bus", "car", "motorcycle", "truck"};
};

/// Deterministic textual fusion of one scene. Bearing is measured TX → RX.
SceneText scene_to_text(const SceneRecord& rec, const SceneTextOptions& options = {});

/// Formats used inside scene text; exposed so callers can compare against geo output.
std::string format_distance_km(double km);
std::string format_bearing_deg(double deg);

struct AnnotationEndpoint {
  std::string url;
  HttpOptions http;
};

/// Fills camera_caption from a caption service (POST {"image_ref"} -> {"caption"}).
/// Without an endpoint, or when the record already has a caption, returns an
/// unchanged copy. Throws ValidationError when a caption is needed but image_ref is absent.
SceneRecord annotate_scene(const SceneRecord& rec, const AnnotationEndpoint* endpoint);

}  // namespace scenerag::scene
