#include <cstring>

#include "obeskit/core/exec.hpp"
#include "obeskit/geoagg.hpp"

namespace obeskit::geoagg {

namespace {
const char* kAlphabet = "0123456789bcdefghjkmnpqrstuvwxyz";

int char_value(char c) {
    const char* p = std::strchr(kAlphabet, c);
    return p && c != '\0' ? static_cast<int>(p - kAlphabet) : -1;
}
}  // namespace

std::string geohash_encode(double lat, double lon, int precision) {
    if (precision < 1 || precision > 12) throw ConfigError("geohash precision must be 1..12");
    if (!geo::valid_lat(lat) || !geo::valid_lon(lon))
        throw DataError("geohash_encode: coordinates out of range");

    double lat_lo = -90.0, lat_hi = 90.0, lon_lo = -180.0, lon_hi = 180.0;
    std::string out;
    out.reserve(precision);
    int bit = 0, value = 0;
    bool lon_turn = true;  // even bit positions refine longitude
    while (static_cast<int>(out.size()) < precision) {
        if (lon_turn) {
            const double mid = (lon_lo + lon_hi) / 2.0;
            if (lon >= mid) {
                value = (value << 1) | 1;
                lon_lo = mid;
            } else {
                value <<= 1;
                lon_hi = mid;
            }
        } else {
            const double mid = (lat_lo + lat_hi) / 2.0;
            if (lat >= mid) {
                value = (value << 1) | 1;
                lat_lo = mid;
            } else {
                value <<= 1;
                lat_hi = mid;
            }
        }
        lon_turn = !lon_turn;
        if (++bit == 5) {
            out.push_back(kAlphabet[value]);
            bit = 0;
            value = 0;
        }
    }
    return out;
}

bool geohash_valid(const std::string& code) {
    if (code.empty() || code.size() > 12) return false;
    for (char c : code)
        if (char_value(c) < 0) return false;
    return true;
}

GeohashBox geohash_decode(const std::string& code) {
    if (!geohash_valid(code)) throw DataError("invalid geohash: " + code);
    GeohashBox box{-90.0, 90.0, -180.0, 180.0};
    bool lon_turn = true;
    for (char c : code) {
        const int v = char_value(c);
        for (int b = 4; b >= 0; --b) {
            const int bit = (v >> b) & 1;
            if (lon_turn) {
                const double mid = (box.lon_lo + box.lon_hi) / 2.0;
                (bit ? box.lon_lo : box.lon_hi) = mid;
            } else {
                const double mid = (box.lat_lo + box.lat_hi) / 2.0;
                (bit ? box.lat_lo : box.lat_hi) = mid;
            }
            lon_turn = !lon_turn;
        }
    }
    return box;
}

std::vector<std::string> geohash_encode_batch(const std::vector<geo::LatLon>& pts, int precision) {
    std::vector<std::string> out(pts.size());
    exec::parallel_for(pts.size(), [&](std::size_t i) {
        out[i] = geohash_encode(pts[i].lat, pts[i].lon, precision);
    });
    return out;
}

std::vector<std::string> geohash_encode_batch_serial(const std::vector<geo::LatLon>& pts,
                                                     int precision) {
    std::vector<std::string> out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        out[i] = geohash_encode(pts[i].lat, pts[i].lon, precision);
    return out;
}

}  // namespace obeskit::geoagg
