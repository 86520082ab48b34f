#pragma once

#include <cmath>

namespace obeskit::geo {

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

constexpr double kEarthRadiusM = 6371000.0;

inline double deg2rad(double d) { return d * M_PI / 180.0; }

// Great-circle distance in meters on the WGS-84 mean sphere.
inline double haversine_m(double lat1, double lon1, double lat2, double lon2) {
    const double phi1 = deg2rad(lat1);
    const double phi2 = deg2rad(lat2);
    const double dphi = deg2rad(lat2 - lat1);
    const double dlam = deg2rad(lon2 - lon1);
    const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                     std::cos(phi1) * std::cos(phi2) * std::sin(dlam / 2) * std::sin(dlam / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

inline double haversine_m(const LatLon& a, const LatLon& b) {
    return haversine_m(a.lat, a.lon, b.lat, b.lon);
}

inline bool valid_lat(double lat) { return std::isfinite(lat) && lat >= -90.0 && lat <= 90.0; }
inline bool valid_lon(double lon) { return std::isfinite(lon) && lon >= -180.0 && lon <= 180.0; }

}  // namespace obeskit::geo
