#pragma once

#include <optional>
#include <string>
#include <vector>

#include "obeskit/common.hpp"
#include "obeskit/core/geo.hpp"
#include "obeskit/core/timezone.hpp"
#include "obeskit/ingest.hpp"

namespace obeskit::location {

enum class Category {
    restaurant,
    fast_food,
    takeaway,
    cafe,
    bar,
    supermarket_grocery,
    food_outlet,
    wine_liquor,
    park,
    recreation_indoor,
    sports_facility,
    school,
    home,
    other,
    unknown
};

std::string to_string(Category c);
Category category_from_string(const std::string& s);
const std::vector<Category>& all_categories();

struct PointOfInterest {
    std::string poi_id;
    std::optional<geo::LatLon> center;  // erased by redact_coordinates
    EpochMs arrive_t = 0;
    EpochMs depart_t = 0;
    Category category = Category::unknown;
    bool categorized = false;  // set once a category decision was made
    std::size_t member_points = 0;
    std::string geohash;  // geohash-of-record; survives redaction
};

struct DensityPoint {
    ingest::LocationSample sample;
    double moveability = 0.0;  // 0 = dwelling, 1 = moving at/above reference speed
    double density = 0.0;      // stillness-weighted neighbor count
};

struct PoiConfig {
    double eps_m = 50.0;
    int min_pts = 10;
    double min_stay_min = 10.0;
    double split_gap_min = 30.0;  // one place, two visits beyond this gap
    double v_ref_ms = 1.5;        // speed at which moveability saturates
    int move_window = 5;          // centered samples for the speed estimate
};

// Move-ability and stillness-weighted density per trace point.
std::vector<DensityPoint> moveability_density(const std::vector<ingest::LocationSample>& trace,
                                              const PoiConfig& cfg);
std::vector<DensityPoint> moveability_density_serial(
    const std::vector<ingest::LocationSample>& trace, const PoiConfig& cfg);

// Density-based clustering over still points, split into temporally
// disjoint visits with a minimum stay.
std::vector<PointOfInterest> detect_pois(const ingest::SensorStream& trace, const PoiConfig& cfg = {});

struct GazetteerEntry {
    std::string place_id;
    double lat = 0.0, lon = 0.0;
    Category category = Category::other;
};

struct Gazetteer {
    std::vector<GazetteerEntry> entries;
    static Gazetteer load_csv(const std::string& path);
    void save_csv(const std::string& path) const;
};

// Nearest gazetteer entry within match_radius_m (ties by smaller place_id);
// no match → unknown. Marks the PoI categorized either way.
void categorize_poi(PointOfInterest& poi, const Gazetteer& gaz, double match_radius_m = 75.0);

// Erases the center. Requires a prior category decision.
PointOfInterest redact_coordinates(PointOfInterest poi);

struct HomeSchoolConfig {
    double min_history_days = 7.0;
    int night_start_h = 0, night_end_h = 6;      // local overnight window
    int school_start_h = 8, school_end_h = 16;   // local weekday window
};

struct HomeSchoolResult {
    bool labeled = false;
    std::string reason;  // populated when labels are withheld
    std::optional<std::size_t> home_index;
    std::optional<std::size_t> school_index;  // representative PoI per place
};

// Groups PoIs into places (centers within eps_m), then labels the place
// with the most overnight dwell as home and the most weekday-daytime
// dwell (home excluded) as school. Labels every PoI of the winning places.
HomeSchoolResult label_home_school(std::vector<PointOfInterest>& pois, const tz::Zone& zone,
                                   const PoiConfig& poi_cfg = {},
                                   const HomeSchoolConfig& cfg = {});

}  // namespace obeskit::location
