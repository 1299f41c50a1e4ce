#include "scenerag/scene.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "http_client.hpp"
#include "scenerag/errors.hpp"

namespace scenerag::scene {
namespace {

using nlohmann::json;

class RecordReader {
 public:
  RecordReader(const json& obj, std::size_t line) : obj_(obj), line_(line) {}

  [[noreturn]] void fail(const std::string& field, const std::string& reason) const {
    throw ValidationError(line_, field, reason);
  }

  const json* find(const json& obj, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return nullptr;
    return &*it;
  }

  double number(const json& v, const std::string& field) const {
    if (!v.is_number()) fail(field, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(field, "expected a finite number");
    return d;
  }

  std::string string(const json& v, const std::string& field) const {
    if (!v.is_string()) fail(field, "expected a string");
    return v.get<std::string>();
  }

  geo::GeoPoint point(const char* key) const {
    const json* p = find(obj_, key);
    if (!p) fail(key, "missing");
    if (!p->is_object()) fail(key, "expected an object");
    geo::GeoPoint g;
    const std::string prefix = std::string(key) + ".";
    const json* lat = find(*p, "lat_deg");
    const json* lon = find(*p, "lon_deg");
    if (!lat) fail(prefix + "lat_deg", "missing");
    if (!lon) fail(prefix + "lon_deg", "missing");
    g.lat_deg = number(*lat, prefix + "lat_deg");
    g.lon_deg = number(*lon, prefix + "lon_deg");
    if (const json* alt = find(*p, "alt_m")) g.alt_m = number(*alt, prefix + "alt_m");
    return g;
  }

  SceneRecord read() const {
    if (!obj_.is_object()) fail("record", "expected a JSON object");
    const json* schema = find(obj_, "schema");
    if (!schema) fail("schema", "missing");
    if (!schema->is_number_integer() || schema->get<long long>() != kSchemaVersion) {
      fail("schema", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
    }

    SceneRecord rec;
    const json* id = find(obj_, "scene_id");
    if (!id) fail("scene_id", "missing");
    rec.scene_id = string(*id, "scene_id");

    const json* ts = find(obj_, "timestamp_us");
    if (!ts) fail("timestamp_us", "missing");
    if (!ts->is_number_integer()) fail("timestamp_us", "expected an integer");
    rec.timestamp_us = ts->get<std::int64_t>();

    rec.gps_tx = point("gps_tx");
    rec.gps_rx = point("gps_rx");
    if (const json* c = find(obj_, "camera_caption")) rec.camera_caption = string(*c, "camera_caption");
    if (const json* c = find(obj_, "lidar_caption")) rec.lidar_caption = string(*c, "lidar_caption");
    if (const json* r = find(obj_, "image_ref")) rec.image_ref = string(*r, "image_ref");

    if (const json* dets = find(obj_, "detections")) {
      if (!dets->is_array()) fail("detections", "expected an array");
      for (std::size_t i = 0; i < dets->size(); ++i) {
        const json& d = (*dets)[i];
        const std::string prefix = "detections[" + std::to_string(i) + "].";
        if (!d.is_object()) fail("detections[" + std::to_string(i) + "]", "expected an object");
        Detection det;
        const json* cls = find(d, "class");
        if (!cls) fail(prefix + "class", "missing");
        det.class_name = string(*cls, prefix + "class");
        const json* conf = find(d, "confidence");
        if (!conf) fail(prefix + "confidence", "missing");
        det.confidence = number(*conf, prefix + "confidence");
        if (const json* bb = find(d, "bbox")) {
          if (!bb->is_array() || bb->size() != 4) fail(prefix + "bbox", "expected [x, y, w, h]");
          det.bbox = BoundingBox{number((*bb)[0], prefix + "bbox"), number((*bb)[1], prefix + "bbox"),
                                 number((*bb)[2], prefix + "bbox"), number((*bb)[3], prefix + "bbox")};
        }
        rec.detections.push_back(std::move(det));
      }
    }

    if (const json* pw = find(obj_, "power")) {
      if (!pw->is_array() || pw->size() != kPowerArrays) {
        fail("power", "expected " + std::to_string(kPowerArrays) + " rows");
      }
      PowerMatrix m{};
      for (std::size_t r = 0; r < kPowerArrays; ++r) {
        const json& row = (*pw)[r];
        const std::string field = "power[" + std::to_string(r) + "]";
        if (!row.is_array() || row.size() != kBeamsPerArray) {
          fail(field, "expected " + std::to_string(kBeamsPerArray) + " columns");
        }
        for (std::size_t c = 0; c < kBeamsPerArray; ++c) m[r][c] = number(row[c], field);
      }
      rec.power = m;
    }

    validate(rec, line_);
    return rec;
  }

 private:
  const json& obj_;
  std::size_t line_;
};

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string position(const geo::GeoPoint& p) {
  std::string s = "lat " + fixed(p.lat_deg, 6) + ", lon " + fixed(p.lon_deg, 6);
  if (p.alt_m) s += ", alt " + fixed(*p.alt_m, 1) + " m";
  return s;
}

bool is_blank(std::string_view line) { return line.find_first_not_of(" \t\r") == std::string_view::npos; }

}  // namespace

void validate(const SceneRecord& rec, std::size_t line) {
  if (rec.scene_id.empty()) throw ValidationError(line, "scene_id", "must not be empty");
  try {
    geo::validate(rec.gps_tx);
  } catch (const DomainError& e) {
    throw ValidationError(line, "gps_tx", e.what());
  }
  try {
    geo::validate(rec.gps_rx);
  } catch (const DomainError& e) {
    throw ValidationError(line, "gps_rx", e.what());
  }
  for (std::size_t i = 0; i < rec.detections.size(); ++i) {
    const auto& d = rec.detections[i];
    const std::string prefix = "detections[" + std::to_string(i) + "].";
    if (d.class_name.empty()) throw ValidationError(line, prefix + "class", "must not be empty");
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
      throw ValidationError(line, prefix + "confidence", "must be within [0, 1]");
    }
    if (d.bbox) {
      for (double v : {d.bbox->x, d.bbox->y, d.bbox->w, d.bbox->h}) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(line, prefix + "bbox", "components must be within [0, 1]");
      }
    }
  }
  if (rec.power) {
    for (const auto& row : *rec.power) {
      for (double v : row) {
        if (!std::isfinite(v)) throw ValidationError(line, "power", "values must be finite");
      }
    }
  }
}

std::vector<SceneRecord> parse_scene_records(std::istream& in) {
  std::vector<SceneRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(line_no, "record", std::string("malformed JSON: ") + e.what());
    }
    SceneRecord rec = RecordReader(obj, line_no).read();
    if (!seen.insert(rec.scene_id).second) {
      throw ValidationError(line_no, "scene_id", "duplicate scene_id '" + rec.scene_id + "'");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<SceneRecord> parse_scene_records(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_scene_records(in);
}

std::string serialize_scene_record(const SceneRecord& rec) {
  using ordered = nlohmann::ordered_json;
  auto point = [](const geo::GeoPoint& p) {
    ordered o = {{"lat_deg", p.lat_deg}, {"lon_deg", p.lon_deg}};
    if (p.alt_m) o["alt_m"] = *p.alt_m;
    return o;
  };
  ordered o;
  o["schema"] = kSchemaVersion;
  o["scene_id"] = rec.scene_id;
  o["timestamp_us"] = rec.timestamp_us;
  o["gps_tx"] = point(rec.gps_tx);
  o["gps_rx"] = point(rec.gps_rx);
  if (rec.camera_caption) o["camera_caption"] = *rec.camera_caption;
  if (rec.lidar_caption) o["lidar_caption"] = *rec.lidar_caption;
  if (rec.image_ref) o["image_ref"] = *rec.image_ref;
  ordered dets = ordered::array();
  for (const auto& d : rec.detections) {
    ordered od = {{"class", d.class_name}, {"confidence", d.confidence}};
    if (d.bbox) od["bbox"] = {d.bbox->x, d.bbox->y, d.bbox->w, d.bbox->h};
    dets.push_back(std::move(od));
  }
  o["detections"] = std::move(dets);
  if (rec.power) o["power"] = *rec.power;
  return o.dump();
}

std::string format_distance_km(double km) { return fixed(km, 3); }

std::string format_bearing_deg(double deg) {
  std::string s = fixed(deg, 1);
  return s == "360.0" ? "0.0" : s;
}

SceneText scene_to_text(const SceneRecord& rec, const SceneTextOptions& options) {
  validate(rec);
  SceneText out;
  out.scene_id = rec.scene_id;
  out.distance_km = geo::haversine_distance(rec.gps_tx, rec.gps_rx);
  out.bearing_deg = geo::initial_bearing(rec.gps_tx, rec.gps_rx);

  std::map<std::string, std::size_t> census;
  for (const auto& d : rec.detections) {
    ++census[d.class_name];
    if (options.vehicle_classes.count(d.class_name)) ++out.vehicle_count;
  }

  std::string body;
  body += "Scene " + rec.scene_id + " (timestamp " + std::to_string(rec.timestamp_us) + " us)\n";
  body += "Camera: " + rec.camera_caption.value_or("no camera description") + "\n";
  if (rec.lidar_caption) body += "Lidar: " + *rec.lidar_caption + "\n";

  body += "Objects: ";
  if (census.empty()) {
    body += "none";
  } else {
    bool first = true;
    for (const auto& [cls, n] : census) {
      if (!first) body += ", ";
      body += cls + ": " + std::to_string(n);
      first = false;
    }
  }
  body += "\nVehicle count: " + std::to_string(out.vehicle_count) + "\n";

  body += "TX position: " + position(rec.gps_tx) + "\n";
  body += "RX position: " + position(rec.gps_rx) + "\n";
  body += "TX–RX distance: " + format_distance_km(out.distance_km) + " km\n";
  body += "bearing TX→RX: " + format_bearing_deg(out.bearing_deg) + "°\n";

  if (rec.power) {
    BeamIndex best;
    double best_power = 0.0;
    for (std::size_t a = 0; a < kPowerArrays; ++a) {
      const auto& row = (*rec.power)[a];
      std::size_t arg = 0;
      for (std::size_t b = 1; b < kBeamsPerArray; ++b) {
        if (row[b] > row[arg]) arg = b;
      }
      body += "Array " + std::to_string(a) + " max power " + general(row[arg]) + " at beam " + std::to_string(arg) + "\n";
      if (a == 0 || row[arg] > best_power) {
        best = {a, arg};
        best_power = row[arg];
      }
    }
    out.best_beam = best;
    body += "Best beam: array " + std::to_string(best.array_index) + ", beam " + std::to_string(best.beam_index) + "\n";
  }

  out.body = std::move(body);
  return out;
}

SceneRecord annotate_scene(const SceneRecord& rec, const AnnotationEndpoint* endpoint) {
  SceneRecord out = rec;
  if (!endpoint || rec.camera_caption) return out;
  if (!rec.image_ref) throw ValidationError(0, "image_ref", "needed to request a caption for scene '" + rec.scene_id + "'");

  const json request = {{"image_ref", *rec.image_ref}};
  const std::string raw = http::post_json(endpoint->url, request.dump(), endpoint->http);
  json response;
  try {
    response = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("caption response is not JSON: ") + e.what());
  }
  auto it = response.find("caption");
  if (it == response.end() || !it->is_string()) throw ProtocolError("caption response lacks a 'caption' string");
  out.camera_caption = it->get<std::string>();
  return out;
}

}  // namespace scenerag::scene
