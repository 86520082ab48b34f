#include <sstream>

#include <nlohmann/json.hpp>

#include "obeskit/geoagg.hpp"

namespace obeskit::geoagg {

using nlohmann::json;

// GeoJSON FeatureCollection: one polygon per published cell ([lon, lat] ring,
// closed, counter-clockwise). Cells below the privacy floor are omitted.
std::string cells_to_geojson(const std::vector<AggregateCell>& cells) {
    json features = json::array();
    for (const auto& cell : cells) {
        if (cell.suppressed) continue;
        const GeohashBox box = geohash_decode(cell.gh);
        json ring = json::array({
            json::array({box.lon_lo, box.lat_lo}),
            json::array({box.lon_hi, box.lat_lo}),
            json::array({box.lon_hi, box.lat_hi}),
            json::array({box.lon_lo, box.lat_hi}),
            json::array({box.lon_lo, box.lat_lo}),
        });
        json props{{"geohash", cell.gh},
                   {"n_votes", cell.n_votes},
                   {"n_voters", cell.n_voters}};
        for (const auto& [name, s] : cell.stats) {
            props[name + "_sum"] = s.sum;
            props[name + "_mean"] = s.mean;
            props[name + "_n"] = s.n;
            if (!s.hist.empty()) {
                props[name + "_hist_edges"] = s.hist_edges;
                props[name + "_hist"] = s.hist;
            }
        }
        features.push_back(json{{"type", "Feature"},
                                {"geometry", json{{"type", "Polygon"},
                                                  {"coordinates", json::array({ring})}}},
                                {"properties", props}});
    }
    json fc{{"type", "FeatureCollection"}, {"features", features}};
    return fc.dump(2) + "\n";
}

// Long-format CSV, one row per published (cell, indicator).
std::string cells_to_csv(const std::vector<AggregateCell>& cells) {
    std::ostringstream out;
    out << "geohash,n_votes,n_voters,indicator,sum,n,mean\n";
    out.precision(12);
    for (const auto& cell : cells) {
        if (cell.suppressed) continue;
        if (cell.stats.empty()) {
            out << cell.gh << "," << cell.n_votes << "," << cell.n_voters << ",,,,\n";
            continue;
        }
        for (const auto& [name, s] : cell.stats)
            out << cell.gh << "," << cell.n_votes << "," << cell.n_voters << "," << name << ","
                << s.sum << "," << s.n << "," << s.mean << "\n";
    }
    return out.str();
}

}  // namespace obeskit::geoagg
