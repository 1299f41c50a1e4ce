#include "scenerag/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "scenerag/errors.hpp"

namespace scenerag::geo {
namespace {

constexpr double to_radians(double deg) { return deg * (std::numbers::pi / 180.0); }

}  // namespace

void validate(const GeoPoint& p) {
  if (!std::isfinite(p.lat_deg) || p.lat_deg < -90.0 || p.lat_deg > 90.0) {
    throw DomainError("latitude out of range [-90, 90]: " + std::to_string(p.lat_deg));
  }
  if (!std::isfinite(p.lon_deg) || p.lon_deg < -180.0 || p.lon_deg > 180.0) {
    throw DomainError("longitude out of range [-180, 180]: " + std::to_string(p.lon_deg));
  }
}

double haversine_distance(const GeoPoint& p1, const GeoPoint& p2, const GeoConstants& constants) {
  validate(p1);
  validate(p2);
  if (!(constants.earth_radius_km > 0.0)) {
    throw DomainError("earth radius must be positive");
  }

  const double phi1 = to_radians(p1.lat_deg);
  const double phi2 = to_radians(p2.lat_deg);
  const double half_dphi = (phi2 - phi1) / 2.0;
  const double half_dlambda = (to_radians(p2.lon_deg) - to_radians(p1.lon_deg)) / 2.0;

  const double sin_dphi = std::sin(half_dphi);
  const double sin_dlambda = std::sin(half_dlambda);
  double a = sin_dphi * sin_dphi + std::cos(phi1) * std::cos(phi2) * (sin_dlambda * sin_dlambda);
  // rounding can push a marginally outside [0, 1] near antipodes
  a = std::clamp(a, 0.0, 1.0);

  return 2.0 * constants.earth_radius_km * std::atan2(std::sqrt(a), std::sqrt(1.0 - a));
}

double initial_bearing(const GeoPoint& p1, const GeoPoint& p2) {
  validate(p1);
  validate(p2);
  if (p1.lat_deg == p2.lat_deg && p1.lon_deg == p2.lon_deg) {
    return 0.0;
  }

  const double phi1 = to_radians(p1.lat_deg);
  const double phi2 = to_radians(p2.lat_deg);
  const double dlambda = to_radians(p2.lon_deg) - to_radians(p1.lon_deg);

  const double east = std::sin(dlambda) * std::cos(phi2);
  const double north = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
  const double theta = std::atan2(east, north);

  double bearing = std::fmod(theta * 180.0 / std::numbers::pi + 360.0, 360.0);
  // fmod of a value just below 360 can round back up to exactly 360
  if (bearing >= 360.0) bearing -= 360.0;
  return bearing;
}

}  // namespace scenerag::geo
