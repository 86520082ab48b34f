#include <cmath>

#include "obeskit/transport.hpp"

namespace obeskit::transport {

const std::vector<std::string>& mode_classes() {
    static const std::vector<std::string> classes = {"walk_run", "bike", "car", "bus",
                                                     "train_subway"};
    return classes;
}

std::vector<Trip> segment_trips(const std::vector<location::PointOfInterest>& pois,
                                const ingest::CoverageMap& accel_coverage,
                                const TripConfig& cfg) {
    std::vector<Trip> trips;
    const EpochMs min_ms = static_cast<EpochMs>(std::llround(cfg.min_trip_s * 1000.0));
    for (std::size_t i = 0; i + 1 < pois.size(); ++i) {
        if (pois[i + 1].arrive_t < pois[i].depart_t)
            throw DataError("segment_trips: stays overlap in time");
        const EpochMs start = pois[i].depart_t;
        const EpochMs end = pois[i + 1].arrive_t;
        if (end - start < min_ms) continue;
        const EpochMs recorded = accel_coverage.recorded_between(start, end);
        if (static_cast<double>(recorded) <
            cfg.min_coverage * static_cast<double>(end - start))
            continue;  // not enough accelerometer signal to call a mode
        Trip t;
        t.start_t = start;
        t.end_t = end;
        t.origin_poi = pois[i].poi_id;
        t.dest_poi = pois[i + 1].poi_id;
        trips.push_back(std::move(t));
    }
    return trips;
}

}  // namespace obeskit::transport
