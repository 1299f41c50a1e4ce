#pragma once

#include <optional>

namespace scenerag::geo {

/// Mean Earth radius used by the spherical model, in kilometres.
inline constexpr double kDefaultEarthRadiusKm = 6371.0;

struct GeoPoint {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  std::optional<double> alt_m;  // carried through to scene text, ignored by the math

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct GeoConstants {
  double earth_radius_km = kDefaultEarthRadiusKm;
};

/// Throws DomainError unless lat ∈ [-90, 90], lon ∈ [-180, 180] and both are finite.
void validate(const GeoPoint& p);

/// Great-circle distance on a sphere via the haversine formula. Result in [0, πR].
double haversine_distance(const GeoPoint& p1, const GeoPoint& p2, const GeoConstants& constants = {});

/// Initial compass bearing from p1 towards p2 in degrees, normalised to [0, 360).
/// Coincident points have no defined direction; 0.0 is returned for them.
double initial_bearing(const GeoPoint& p1, const GeoPoint& p2);

}  // namespace scenerag::geo
