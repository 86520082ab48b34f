#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "obeskit/common.hpp"
#include "obeskit/core/geo.hpp"

namespace obeskit::geoagg {

// ---- geohash codec ----

struct GeohashBox {
    double lat_lo = 0.0, lat_hi = 0.0, lon_lo = 0.0, lon_hi = 0.0;
    double center_lat() const { return (lat_lo + lat_hi) / 2.0; }
    double center_lon() const { return (lon_lo + lon_hi) / 2.0; }
    bool contains(double lat, double lon) const {
        return lat >= lat_lo && lat < lat_hi && lon >= lon_lo && lon < lon_hi;
    }
};

std::string geohash_encode(double lat, double lon, int precision);
GeohashBox geohash_decode(const std::string& code);
bool geohash_valid(const std::string& code);

std::vector<std::string> geohash_encode_batch(const std::vector<geo::LatLon>& pts, int precision);
std::vector<std::string> geohash_encode_batch_serial(const std::vector<geo::LatLon>& pts,
                                                     int precision);

// ---- anonymous votes ----

struct GeohashVote {
    std::string gh;      // cell at vote precision
    std::string voter;   // salted-hash tag, never a raw subject id
    EpochMs t0 = 0, t1 = 0;  // visit interval
    std::map<std::string, double> payload;  // indicator name → value
};

// Append-only store with per-visit duplicate suppression; safe under
// concurrent writers.
class VoteStore {
public:
    VoteStore() = default;
    explicit VoteStore(const std::string& log_path);  // appends accepted votes as JSONL
    VoteStore(VoteStore&& other) noexcept
        : votes_(std::move(other.votes_)),
          seen_(std::move(other.seen_)),
          log_path_(std::move(other.log_path_)) {}

    // False when an identical (voter, cell, interval) vote already exists.
    bool cast(const GeohashVote& v);
    std::size_t size() const;
    std::vector<GeohashVote> snapshot() const;

    static VoteStore load(const std::string& log_path);

private:
    mutable std::mutex mu_;
    std::vector<GeohashVote> votes_;
    std::set<std::string> seen_;
    std::string log_path_;
};

// ---- aggregation ----

struct IndicatorStats {
    double sum = 0.0;
    std::size_t n = 0;
    double mean = 0.0;
    std::vector<double> hist_edges;   // k edges → k-1 bins
    std::vector<std::size_t> hist;    // counts per bin
};

struct AggregateCell {
    std::string gh;
    std::size_t n_votes = 0;
    std::size_t n_voters = 0;
    bool suppressed = false;  // fewer distinct voters than the privacy floor
    std::map<std::string, IndicatorStats> stats;
};

struct AggregateConfig {
    std::size_t k_anon = 5;
    std::map<std::string, std::vector<double>> hist_edges;  // per indicator, optional
};

// Cells at `precision` (votes truncated to that length), voter-distinct
// counts, k-anonymity suppression flag.
std::vector<AggregateCell> aggregate_population(const std::vector<GeohashVote>& votes,
                                                int precision, const AggregateConfig& cfg);

// ---- individual aggregation ----

struct DayRecord {
    std::string date;  // local YYYY-MM-DD
    double recorded_hours = 0.0;
    std::map<std::string, double> totals;  // daily indicator totals (e.g. steps)
};

struct IndividualAgg {
    bool defined = false;
    std::string reason;  // when undefined
    std::size_t n_days = 0;
    std::map<std::string, double> per_hour_mean;  // rate = total/recorded_hours, mean across days
    std::map<std::string, double> daily_mean;     // plain mean of totals across days
};

// Keeps days with at least `min_hours` recorded, converts totals to
// per-hour rates, and averages across the surviving days.
IndividualAgg aggregate_individual(const std::vector<DayRecord>& days, double min_hours = 8.0);

// ---- mobility graph ----

struct MobilityNode {
    std::string category;
    std::size_t visits = 0;
    double dwell_min = 0.0;
};

struct MobilityEdge {
    std::string from, to;
    std::size_t count = 0;
    double probability = 0.0;       // count / outgoing(from)
    double mean_distance_m = 0.0;   // mean center-to-center distance, pre-redaction
    std::map<std::string, double> mode_share;  // dominant-mode distribution over transitions
};

struct MobilityGraph {
    std::vector<MobilityNode> nodes;
    std::vector<MobilityEdge> edges;
};

/// Pipeline-agnostic inputs: one VisitRef per categorized stay, one
// TransitionRef per consecutive stay pair of the same subject.
struct VisitRef {
    std::string category;
    EpochMs arrive = 0, depart = 0;
    std::optional<geo::LatLon> center;  // available pre-redaction only
};

struct TransitionRef {
    std::size_t from_visit = 0, to_visit = 0;  // indices into the visit list
    std::string dominant_mode;                 // empty when no classified trip spans the pair
};

MobilityGraph build_mobility_graph(const std::vector<VisitRef>& visits,
                                   const std::vector<TransitionRef>& transitions);

// ---- indicator catalog ----

enum class Axis { resident, visitor, vote };
enum class Sensor { acc, loc, gis };

struct CatalogEntry {
    std::string name;
    std::string group;  // logical family of the indicator
    std::vector<Axis> axes;
    std::vector<Sensor> sensors;
};

const std::vector<CatalogEntry>& indicator_catalog();
std::string to_string(Axis a);
std::string to_string(Sensor s);

// ---- exports ----

std::string cells_to_geojson(const std::vector<AggregateCell>& cells);
std::string cells_to_csv(const std::vector<AggregateCell>& cells);

}  // namespace obeskit::geoagg
